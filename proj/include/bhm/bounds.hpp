#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bhm {

// The powers of two in these formulas are the deliverable; they are kept as
// exact integer constants and combined with floats only at evaluation time.
inline constexpr std::int64_t kC9 = 1 << 9;
inline constexpr std::int64_t kC10 = 1 << 10;
inline constexpr std::int64_t kC11 = 1 << 11;
inline constexpr std::int64_t kC12 = 1 << 12;
inline constexpr std::int64_t kC13 = 1 << 13;
inline constexpr std::int64_t kC14 = 1 << 14;

struct BoundReport {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool satisfied = true;
    double slack = 0;
    bool hypotheses_ok = true;

    static BoundReport make(std::string name, double lhs, double rhs, bool hypotheses_ok = true) {
        BoundReport r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.satisfied = lhs <= rhs;
        r.slack = rhs - lhs;
        r.hypotheses_ok = hypotheses_ok;
        return r;
    }
};

inline std::string bound_reports_csv(const std::vector<BoundReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "name,lhs,rhs,satisfied,slack,hypotheses_ok\n";
    for (const auto& r : reports)
        os << r.name << ',' << r.lhs << ',' << r.rhs << ',' << (r.satisfied ? 1 : 0) << ','
           << r.slack << ',' << (r.hypotheses_ok ? 1 : 0) << '\n';
    return os.str();
}

inline nlohmann::json bound_reports_json(const std::vector<BoundReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports)
        j.push_back({{"name", r.name},
                     {"lhs", r.lhs},
                     {"rhs", r.rhs},
                     {"satisfied", r.satisfied},
                     {"slack", r.slack},
                     {"hypotheses_ok", r.hypotheses_ok}});
    return j;
}

// a(gamma) = 2^14 d t^2/U^2 j + 2^12 d t^2/U l, the loop convergence weight.
inline double kp_loop_functional(double jumps, double vertical_length, int d, double t, double U) {
    if (U <= 0) throw std::invalid_argument("kp_loop_functional: U must be positive");
    double t2 = t * t;
    return double(kC14) * d * t2 / (U * U) * jumps + double(kC12) * d * t2 / U * vertical_length;
}

// Mott hypothesis for the unit-density lobe: 0 < mu < U/4 and
// t < mu/2d - const t^2/U with const fixed at its stated worst case 2^11 d.
inline bool unit_mott_condition(double t, double mu, double U, int d) {
    if (!(mu > 0 && mu < U / 4)) return false;
    return t < mu / (2.0 * d) - double(kC11) * d * t * t / U;
}

// Geometric series over even-jump loop entropies; closed form
// 2^10 d t^2/U / (1 - (2^6 d t/U)^2), valid only for ratio < 1.
inline double geometric_loop_series_ratio(int d, double t, double U) {
    double r = 64.0 * d * t / U;
    return r * r;
}

inline double geometric_loop_series_closed_form(int d, double t, double U) {
    double ratio = geometric_loop_series_ratio(d, t, U);
    if (ratio >= 1)
        throw std::invalid_argument("geometric_loop_series: 2^6 d t / U >= 1, series diverges");
    return double(kC10) * d * t * t / U / (1 - ratio);
}

inline double geometric_loop_series_partial_sum(int d, double t, double U, int n_terms) {
    double first = double(kC10) * d * t * t / U;
    double ratio = geometric_loop_series_ratio(d, t, U);
    double sum = 0, term = first;
    for (int n = 0; n < n_terms; ++n) {
        sum += term;
        term *= ratio;
    }
    return sum;
}

// Precondition used throughout the loop estimates: e^{2^14 d t^2/U^2} < 2.
inline double jump_weight_exponential(int d, double t, double U) {
    return std::exp(double(kC14) * d * t * t / (U * U));
}

// The four loop-family bounds plus the proof-internal checks. Only the
// right-hand sides are pinned formulas; lhs entries carry the proof-internal
// series where one exists (parts (a) and (b)), and 0 where the left side is
// a loop integral evaluated elsewhere (parts (c) and (d)).
inline std::vector<BoundReport> loop_family_bounds(int d, double t, double U, double mu, double beta) {
    bool hyp = unit_mott_condition(t, mu, U, d);
    double t2 = t * t;
    std::vector<BoundReport> out;

    bool series_ok = geometric_loop_series_ratio(d, t, U) < 1;
    double series = series_ok ? geometric_loop_series_closed_form(d, t, U)
                              : std::numeric_limits<double>::infinity();

    double rhs_a = double(kC11) * d * t2 / U;
    out.push_back(BoundReport::make("nonwinding_loop_sum", series, rhs_a, hyp && series_ok));

    double rhs_b = std::exp(-beta * (U - mu - double(kC12) * d * t2 / U)) +
                   double(kC13) * d * t2 / (U * U);
    double lhs_b = std::exp(-beta * (U - mu - double(kC12) * d * t2 / U)) +
                   (series_ok ? series * 4.0 / U : std::numeric_limits<double>::infinity());
    out.push_back(BoundReport::make("doublon_winding_loop_sum", lhs_b, rhs_b, hyp && series_ok));

    double expo_cd = -beta * (mu - 2.0 * d * t - double(kC12) * d * d * t2 / U);
    out.push_back(BoundReport::make("hole_winding_loop_jump_sum", 0.0, 4.0 * d * t * std::exp(expo_cd), hyp));
    out.push_back(BoundReport::make("hole_winding_loop_sum", 0.0, std::exp(expo_cd), hyp));

    double partial = series_ok ? geometric_loop_series_partial_sum(d, t, U, 200)
                               : std::numeric_limits<double>::infinity();
    out.push_back(BoundReport::make("jump_series_vs_closed_form",
                                    series_ok ? std::abs(partial - series) : partial, 1e-10,
                                    series_ok));
    out.push_back(
        BoundReport::make("jump_exponential_below_2", jump_weight_exponential(d, t, U), 2.0, hyp));
    return out;
}

// rhs of the sigma row-sum estimate: 2dt e^{2^14 d t^2/U^2} + 2^9 d^2 t^2/U.
inline double sigma_rowsum_rhs(int d, double t, double U) {
    return 2.0 * d * t * jump_weight_exponential(d, t, U) +
           double(kC9) * d * d * t * t / U;
}

inline BoundReport sigma_rowsum_bound(int d, double t, double U, double mu,
                                      double truncated_row_sum) {
    bool hyp = unit_mott_condition(t, mu, U, d);
    return BoundReport::make("sigma_rowsum", truncated_row_sum, sigma_rowsum_rhs(d, t, U), hyp);
}

// Variational upper bound b(rho), its minimum c and the density floor a for
// the dilute regime t > -mu/2d.
struct DensityBoundsRho0 {
    double a = 0;         // ground-state density is at least this
    double c = 0;         // minimum value of b
    double rho_star = 0;  // argmin of b
    bool hypotheses_ok = true;
    int d = 1;
    double t = 0, mu = 0;

    double b(double rho) const {
        return (-mu - 2.0 * d * t) * rho + M_PI * M_PI * d * t * std::pow(rho, 1.0 + 2.0 / d);
    }
};

inline DensityBoundsRho0 density_bounds_rho0(double t, double mu, int d) {
    DensityBoundsRho0 out;
    out.d = d;
    out.t = t;
    out.mu = mu;
    double slack = mu + 2.0 * d * t;
    out.hypotheses_ok = slack > 0 && t > 0;
    if (!out.hypotheses_ok) return out;
    out.rho_star = std::pow(slack / (M_PI * M_PI * t * (d + 2)), d / 2.0);
    out.c = -2.0 / std::pow(M_PI * M_PI * t, d / 2.0) * std::pow(slack / (d + 2), 1.0 + d / 2.0);
    out.a = 2.0 / (d + 2) * std::pow(slack / (M_PI * M_PI * t * (d + 2)), d / 2.0);
    return out;
}

// Hole version around unit density: b~(rho), the hole-density lower bound
// quotient, and the non-Mott threshold of the generalized hard-core model.
struct DensityBoundsRho1 {
    double numerator = 0;    // 2/(pi^2 t)^{d/2} ((2dt-mu)/(d+2))^{1+d/2} - 2^11 d t^2/U
    double denominator = 0;  // 2dt - mu + 2^10 d^2 t^2/U
    double hole_bound = 0;   // 1 - rho >= this when numerator > 0
    bool numerator_positive = false;
    bool hypotheses_ok = true;
    bool threshold_condition = false;  // t > mu/2d + C t (t/U)^{2/(d+2)}
    double threshold_constant = 0;     // C = (d+2)/(2d) (2^10 d pi^d)^{2/(d+2)}
    int d = 1;
    double t = 0, mu = 0, U = 0;

    double b_tilde(double rho) const {
        return -mu + (mu - 2.0 * d * t) * (1 - rho) +
               M_PI * M_PI * d * t * std::pow(1 - rho, 1.0 + 2.0 / d);
    }
};

inline DensityBoundsRho1 density_bounds_rho1(double t, double mu, double U, int d) {
    DensityBoundsRho1 out;
    out.d = d;
    out.t = t;
    out.mu = mu;
    out.U = U;
    double slack = 2.0 * d * t - mu;
    out.hypotheses_ok = slack > 0 && t > 0 && U > 0;
    out.threshold_constant =
        (d + 2) / (2.0 * d) * std::pow(double(kC10) * d * std::pow(M_PI, d), 2.0 / (d + 2));
    if (!out.hypotheses_ok) return out;
    out.numerator = 2.0 / std::pow(M_PI * M_PI * t, d / 2.0) *
                        std::pow(slack / (d + 2), 1.0 + d / 2.0) -
                    double(kC11) * d * t * t / U;
    out.denominator = slack + double(kC10) * d * d * t * t / U;
    out.numerator_positive = out.numerator > 0;
    out.hole_bound = out.numerator / out.denominator;
    out.threshold_condition =
        t > mu / (2.0 * d) + out.threshold_constant * t * std::pow(t / U, 2.0 / (d + 2));
    return out;
}

// Geometric-sum side of the dilute-regime criterion:
// (j + 2dt e^a beta l) sum_{l'>=1} e^{beta l' (mu + 2dt e^a + b)} <= a j + beta b l.
inline BoundReport dilute_cluster_inequality_check(double t, double mu, int d, double a, double b,
                                           double beta, double jumps, double winding) {
    double margin = mu + 2.0 * d * t * std::exp(a) + b;
    bool hyp = margin < 0;
    double lhs;
    if (hyp) {
        double r = std::exp(beta * margin);
        lhs = (jumps + 2.0 * d * t * std::exp(a) * beta * winding) * r / (1 - r);
    } else {
        lhs = std::numeric_limits<double>::infinity();
    }
    double rhs = a * jumps + beta * b * winding;
    return BoundReport::make("dilute_cluster_inequality", lhs, rhs, hyp);
}

}  // namespace bhm
