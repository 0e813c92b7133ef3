#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhm/bounds.hpp"

namespace bhm {

struct PhasePoint {
    double t = 0, mu = 0, U = 0;
    int d = 1;
    bool hard_core = false;  // occupation cap 1; otherwise cap 2 with finite U

    void validate() const {
        if (t <= 0) throw std::invalid_argument("phase point: t must be positive");
        if (d < 1) throw std::invalid_argument("phase point: dimension must be >= 1");
        if (!hard_core && U <= 0)
            throw std::invalid_argument("phase point: U must be positive unless hard core");
    }
};

enum class PhaseLabel { mott_proven, non_mott_proven_lower, non_mott_proven_upper, unresolved };

struct PhaseVerdict {
    PhaseLabel label = PhaseLabel::unresolved;
    int mott_density = -1;  // set when label == mott_proven
    std::vector<std::string> witnesses;

    std::string label_string() const {
        switch (label) {
            case PhaseLabel::mott_proven:
                return "MottProven(" + std::to_string(mott_density) + ")";
            case PhaseLabel::non_mott_proven_lower:
                return "NonMottProvenLower";
            case PhaseLabel::non_mott_proven_upper:
                return "NonMottProvenUpper";
            default:
                return "Unresolved";
        }
    }
};

// Exact ground-state critical hopping of the hard-core gas.
inline double tc_hardcore(double mu, int d) {
    if (d < 1) throw std::invalid_argument("tc_hardcore: dimension must be >= 1");
    return std::abs(mu) / (2.0 * d);
}

// Piecewise critical-hopping approximation from the low-energy restricted
// models: |mu|/2d below U/2, then |mu - kU|/(2d(k+1)) on the k-th lobe.
struct TcApprox {
    double tc = 0;
    int lobe = 0;                  // lobe index k whose branch was used
    bool branch_boundary = false;  // mu sits exactly between two lobes
};

inline TcApprox tc_approx(double mu, double U, int d) {
    if (U <= 0) throw std::invalid_argument("tc_approx: U must be positive");
    if (d < 1) throw std::invalid_argument("tc_approx: dimension must be >= 1");
    auto branch = [&](int k) {
        if (k == 0) return std::abs(mu) / (2.0 * d);
        return std::abs(mu - k * U) / (2.0 * d * (k + 1));
    };
    TcApprox out;
    double x = mu / U + 0.5;  // lobe boundaries sit at integer x
    double nearest = std::round(x);
    if (nearest >= 1.0 && std::abs(x - nearest) < 1e-12) {
        // ambiguous half-integer boundary: take the smaller adjacent branch
        int k_hi = int(nearest);
        double lo = branch(k_hi - 1), hi = branch(k_hi);
        out.branch_boundary = true;
        out.lobe = (hi <= lo) ? k_hi : k_hi - 1;
        out.tc = std::min(lo, hi);
        return out;
    }
    out.lobe = std::max(0, int(std::floor(x)));
    out.tc = branch(out.lobe);
    return out;
}

// Region classification from the proved phase conditions only:
//   - empty phase: mu < -2dt (any U)
//   - unit-density insulator: unit_mott_condition (soft core),
//     or mu > 2dt by particle-hole symmetry (hard core)
//   - doubly-filled insulator: mu > U + 2dt (soft core, particle-hole image
//     of the empty phase under mu -> U - mu)
//   - positive density: t > -mu/2d
//   - density below one: the variational hole threshold (soft core),
//     or t > mu/2d by particle-hole symmetry (hard core)
// Precedence: insulator conditions, then the upper density exclusion, then
// the lower one; everything else stays unresolved.
inline PhaseVerdict classify(const PhasePoint& pt) {
    pt.validate();
    const double wedge = 2.0 * pt.d * pt.t;

    bool mott0 = pt.mu < -wedge;
    bool mott1 = pt.hard_core ? (pt.mu > wedge) : unit_mott_condition(pt.t, pt.mu, pt.U, pt.d);
    bool mott2 = !pt.hard_core && pt.mu > pt.U + wedge;
    bool lower = pt.t > -pt.mu / (2.0 * pt.d);
    bool upper = pt.hard_core
                     ? (pt.t > pt.mu / (2.0 * pt.d))
                     : density_bounds_rho1(pt.t, pt.mu, pt.U, pt.d).threshold_condition;

    // contradiction pairs can never fire together; guard the claim
    if ((mott0 && lower) || (mott1 && upper) || (mott2 && upper) || (mott0 && mott1) ||
        (mott1 && mott2))
        throw std::logic_error("classify: contradictory phase conditions fired");

    PhaseVerdict v;
    if (mott0) {
        v.label = PhaseLabel::mott_proven;
        v.mott_density = 0;
        v.witnesses.push_back("empty_phase_condition");
    } else if (mott1) {
        v.label = PhaseLabel::mott_proven;
        v.mott_density = 1;
        v.witnesses.push_back(pt.hard_core ? "full_phase_condition" : "unit_mott_condition");
    } else if (mott2) {
        v.label = PhaseLabel::mott_proven;
        v.mott_density = 2;
        v.witnesses.push_back("doubly_filled_phase_condition");
    } else if (upper) {
        v.label = PhaseLabel::non_mott_proven_upper;
        v.witnesses.push_back(pt.hard_core ? "hole_density_positive_condition"
                                           : "hole_density_threshold_condition");
        if (lower) v.witnesses.push_back("positive_density_condition");
    } else if (lower) {
        v.label = PhaseLabel::non_mott_proven_lower;
        v.witnesses.push_back("positive_density_condition");
    }
    return v;
}

struct PhaseGridSpec {
    double mu_min = 0, mu_max = 0;
    int n_mu = 0;
    double t_min = 0, t_max = 0;
    int n_t = 0;
    double U = 0;
    int d = 1;
    bool hard_core = false;
};

struct PhaseScan {
    std::vector<PhasePoint> points;     // ordered by (mu, t)
    std::vector<PhaseVerdict> verdicts;
    struct BoundaryPoint {
        double mu = 0, t = 0;           // midpoint of the label change along mu
        std::string from, to;
    };
    std::vector<BoundaryPoint> boundary;
    PhaseGridSpec grid;
};

inline PhaseScan scan_grid(const PhaseGridSpec& g) {
    PhaseScan scan;
    scan.grid = g;
    if (g.n_mu <= 0 || g.n_t <= 0) return scan;
    auto mu_at = [&](int i) {
        return g.n_mu == 1 ? g.mu_min : g.mu_min + i * (g.mu_max - g.mu_min) / (g.n_mu - 1);
    };
    auto t_at = [&](int j) {
        return g.n_t == 1 ? g.t_min : g.t_min + j * (g.t_max - g.t_min) / (g.n_t - 1);
    };
    for (int i = 0; i < g.n_mu; ++i)
        for (int j = 0; j < g.n_t; ++j) {
            PhasePoint pt;
            pt.mu = mu_at(i);
            pt.t = t_at(j);
            pt.U = g.U;
            pt.d = g.d;
            pt.hard_core = g.hard_core;
            scan.points.push_back(pt);
            scan.verdicts.push_back(classify(pt));
        }
    // label changes along the mu axis at fixed t
    for (int j = 0; j < g.n_t; ++j)
        for (int i = 0; i + 1 < g.n_mu; ++i) {
            const auto& a = scan.verdicts[std::size_t(i) * g.n_t + j];
            const auto& b = scan.verdicts[std::size_t(i + 1) * g.n_t + j];
            if (a.label_string() == b.label_string()) continue;
            scan.boundary.push_back(
                {0.5 * (mu_at(i) + mu_at(i + 1)), t_at(j), a.label_string(), b.label_string()});
        }
    return scan;
}

inline std::string phase_scan_csv(const PhaseScan& scan) {
    std::ostringstream os;
    os.precision(17);
    os << "mu,t,U,d,label,witnesses\n";
    for (std::size_t k = 0; k < scan.points.size(); ++k) {
        const auto& p = scan.points[k];
        const auto& v = scan.verdicts[k];
        os << p.mu << ',' << p.t << ',' << p.U << ',' << p.d << ',' << v.label_string() << ',';
        for (std::size_t w = 0; w < v.witnesses.size(); ++w)
            os << (w ? ";" : "") << v.witnesses[w];
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json phase_scan_json(const PhaseScan& scan) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < scan.points.size(); ++k) {
        const auto& p = scan.points[k];
        const auto& v = scan.verdicts[k];
        rows.push_back({{"mu", p.mu},
                        {"t", p.t},
                        {"U", p.U},
                        {"d", p.d},
                        {"label", v.label_string()},
                        {"witnesses", v.witnesses}});
    }
    nlohmann::json j;
    j["rows"] = rows;
    j["boundary"] = nlohmann::json::array();
    for (const auto& b : scan.boundary)
        j["boundary"].push_back({{"mu", b.mu}, {"t", b.t}, {"from", b.from}, {"to", b.to}});
    return j;
}

// Self-contained SVG: one colored cell per grid point, boundary midpoints in
// black, axis labels mu (horizontal) and t (vertical, increasing upward).
inline std::string phase_scan_svg(const PhaseScan& scan, int width = 640, int height = 480) {
    const auto& g = scan.grid;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    const double margin = 48;
    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    auto color = [](const PhaseVerdict& v) {
        switch (v.label) {
            case PhaseLabel::mott_proven:
                return v.mott_density == 0 ? "#9ecae1" : (v.mott_density == 1 ? "#3182bd" : "#08519c");
            case PhaseLabel::non_mott_proven_lower:
                return "#fdae6b";
            case PhaseLabel::non_mott_proven_upper:
                return "#e6550d";
            default:
                return "#cccccc";
        }
    };
    if (g.n_mu > 0 && g.n_t > 0) {
        double cw = plot_w / g.n_mu, ch = plot_h / g.n_t;
        for (std::size_t k = 0; k < scan.points.size(); ++k) {
            int i = int(k) / g.n_t, j = int(k) % g.n_t;
            double x = margin + i * cw;
            double y = margin + plot_h - (j + 1) * ch;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\""
               << ch << "\" fill=\"" << color(scan.verdicts[k]) << "\"/>\n";
        }
        auto xs = [&](double mu) {
            double f = (g.n_mu == 1 || g.mu_max == g.mu_min)
                           ? 0.5
                           : (mu - g.mu_min) / (g.mu_max - g.mu_min);
            return margin + f * plot_w;
        };
        auto ys = [&](double t) {
            double f = (g.n_t == 1 || g.t_max == g.t_min) ? 0.5
                                                          : (t - g.t_min) / (g.t_max - g.t_min);
            return margin + plot_h - f * plot_h;
        };
        for (const auto& b : scan.boundary)
            os << "<circle cx=\"" << xs(b.mu) << "\" cy=\"" << ys(b.t)
               << "\" r=\"1.5\" fill=\"black\"/>\n";
    }
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">mu ["
       << g.mu_min << ", " << g.mu_max << "]</text>\n";
    os << "<text x=\"16\" y=\"" << height / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
          "transform=\"rotate(-90 16 "
       << height / 2 << ")\">t [" << g.t_min << ", " << g.t_max << "]</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace bhm
