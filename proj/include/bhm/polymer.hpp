#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhm/graphs.hpp"
#include "bhm/rational.hpp"

namespace bhm {

// The cluster engine accumulates in extended precision: phi is an
// alternating sum over connected graphs with heavy cancellation.
using PolyScalar = std::complex<long double>;

struct Polymer {
    std::string id;
    PolyScalar weight;
    double kp_weight = 0.0;  // the function a(.) of the convergence criterion
};

struct PolymerSystem {
    std::vector<Polymer> polymers;
    std::vector<std::vector<PolyScalar>> zeta;  // symmetric, dense

    std::size_t size() const { return polymers.size(); }

    PolyScalar z(std::size_t i, std::size_t j) const { return zeta[i][j]; }

    void validate() const {
        if (zeta.size() != polymers.size())
            throw std::invalid_argument("PolymerSystem: zeta size mismatch");
        for (std::size_t i = 0; i < size(); ++i) {
            if (zeta[i].size() != size())
                throw std::invalid_argument("PolymerSystem: zeta row size mismatch");
            for (std::size_t j = 0; j < size(); ++j) {
                if (std::abs(zeta[i][j] - zeta[j][i]) > 1e-15L)
                    throw std::invalid_argument("PolymerSystem: zeta not symmetric");
                if (std::abs(PolyScalar(1) - zeta[i][j]) > 1.0L + 1e-12L)
                    throw std::invalid_argument("PolymerSystem: |1 - zeta| > 1");
            }
        }
    }

    static PolymerSystem make(std::vector<Polymer> polys) {
        PolymerSystem s;
        s.polymers = std::move(polys);
        s.zeta.assign(s.polymers.size(), std::vector<PolyScalar>(s.polymers.size(), PolyScalar(0)));
        return s;
    }
};

namespace detail {

// Sum over connected graphs on the vertex set "full" of prod over edges of
// (-zeta_ij), by the inclusion-exclusion recursion
//   C(S) = A(S) - sum_{T proper subset of S, v0 in T} C(T) A(S \ T),
// where A(S) = prod_{i<j in S} (1 - zeta_ij) is the all-graphs sum and v0 is
// the lowest vertex of S. Avoids materializing the graph lists, which is
// infeasible beyond n = 6 or so.
template <typename Scalar, typename ZetaFn>
std::vector<Scalar> all_graph_sums(int n, ZetaFn zeta) {
    // A[S] for every subset mask S
    std::vector<Scalar> A(std::size_t(1) << n, Scalar(1));
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
        int v = 0;
        while (!(s >> v & 1)) ++v;
        std::uint32_t rest = s & ~(1u << v);
        Scalar prod = A[rest];
        for (int u = 0; u < n; ++u)
            if (rest >> u & 1) prod *= (Scalar(1) - zeta(u, v));
        A[s] = prod;
    }
    return A;
}

template <typename Scalar, typename ZetaFn>
Scalar connected_sum(int n, ZetaFn zeta) {
    auto A = all_graph_sums<Scalar>(n, zeta);
    std::vector<Scalar> C(std::size_t(1) << n, Scalar(0));
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
        int v = 0;
        while (!(s >> v & 1)) ++v;
        Scalar c = A[s];
        // enumerate proper subsets T of s containing v
        std::uint32_t rest = s & ~(1u << v);
        for (std::uint32_t t = rest; t > 0; t = (t - 1) & rest) {
            std::uint32_t T = (t | (1u << v));
            if (T == s) continue;
            c -= C[T] * A[s & ~T];
        }
        // also T = {v} alone when rest != 0
        if (rest != 0) c -= C[1u << v] * A[rest];
        C[s] = c;
    }
    return C[(1u << n) - 1];
}

inline long double factorial_ld(int n) {
    long double f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace detail

// phi on a finite sequence of polymers: 1 for n = 1, otherwise
// (1/n!) sum over connected graphs of prod(-zeta). Exactly zero whenever the
// intersection graph of the sequence is disconnected.
inline PolyScalar phi(const PolymerSystem& sys, const std::vector<std::size_t>& members) {
    const int n = static_cast<int>(members.size());
    if (n < 1) throw std::invalid_argument("phi: empty sequence");
    if (n == 1) return PolyScalar(1);
    if (n > 16) throw std::invalid_argument("phi: sequence too long");
    auto zeta = [&](int i, int j) { return sys.z(members[i], members[j]); };
    PolyScalar c = detail::connected_sum<PolyScalar>(n, zeta);
    return c / detail::factorial_ld(n);
}

// Exact-rational phi for hard-core tables (zeta values in {0,1}).
inline Rational phi_rational(const std::vector<std::vector<int>>& zeta01) {
    const int n = static_cast<int>(zeta01.size());
    if (n < 1) throw std::invalid_argument("phi_rational: empty sequence");
    if (n == 1) return Rational(1);
    if (n > 12) throw std::invalid_argument("phi_rational: sequence too long");
    auto zeta = [&](int i, int j) { return Rational(zeta01[i][j]); };
    Rational c = detail::connected_sum<Rational>(n, zeta);
    std::int64_t fact = 1;
    for (int k = 2; k <= n; ++k) fact *= k;
    return c / Rational(fact);
}

struct SeriesReport {
    PolyScalar value{0};
    std::vector<long double> order_magnitude;  // |sum of terms| of each order, 1-based
    bool converged = true;
    bool diverging = false;
};

namespace detail {

// Enumerates multiplicity vectors (m_0..m_{p-1}) with given total, invoking
// f on each. Sequences over n polymers collapse onto multisets with the
// factor n!/prod(m_a!), which cancels the 1/n! of the definitions; the
// leftover 1/prod(m_a!) is applied by the callers.
template <typename Fn>
void for_each_multiset(std::size_t p, int total, std::vector<int>& mult, std::size_t from, Fn&& f) {
    if (total == 0) {
        f(mult);
        return;
    }
    if (from >= p) return;
    for (int m = total; m >= 0; --m) {
        mult[from] = m;
        for_each_multiset(p, total - m, mult, from + 1, f);
        mult[from] = 0;
    }
}

inline bool support_connected(const PolymerSystem& sys, const std::vector<int>& mult) {
    std::vector<std::size_t> support;
    for (std::size_t a = 0; a < mult.size(); ++a)
        if (mult[a] > 0) support.push_back(a);
    if (support.size() <= 1) return true;
    std::vector<bool> seen(support.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < support.size(); ++j)
            if (!seen[j] && std::abs(sys.z(support[i], support[j])) > 0.0L) {
                seen[j] = true;
                stack.push_back(j);
                ++count;
            }
    }
    return count == support.size();
}

inline std::vector<std::size_t> expand_multiset(const std::vector<int>& mult) {
    std::vector<std::size_t> seq;
    for (std::size_t a = 0; a < mult.size(); ++a)
        for (int k = 0; k < mult[a]; ++k) seq.push_back(a);
    return seq;
}

inline long double mult_factorials(const std::vector<int>& mult) {
    long double f = 1;
    for (int m : mult) f *= factorial_ld(m);
    return f;
}

inline PolyScalar weight_power_product(const PolymerSystem& sys, const std::vector<int>& mult) {
    PolyScalar w(1);
    for (std::size_t a = 0; a < mult.size(); ++a)
        for (int k = 0; k < mult[a]; ++k) w *= sys.polymers[a].weight;
    return w;
}

}  // namespace detail

// Z = sum_n (1/n!) sum over polymer sequences of prod(weights) prod(1-zeta),
// truncated at n_poly_max; exact when hard-core self-interactions kill the
// higher orders. Multisets with pair exponents replace raw sequences.
inline SeriesReport partition_function(const PolymerSystem& sys, int n_poly_max = 12) {
    SeriesReport rep;
    rep.value = PolyScalar(1);  // n = 0 term
    rep.order_magnitude.assign(n_poly_max + 1, 0.0L);
    std::vector<int> mult(sys.size(), 0);
    for (int n = 1; n <= n_poly_max; ++n) {
        PolyScalar order_sum(0);
        detail::for_each_multiset(sys.size(), n, mult, 0, [&](const std::vector<int>& m) {
            PolyScalar term = detail::weight_power_product(sys, m) / detail::mult_factorials(m);
            for (std::size_t a = 0; a < m.size(); ++a) {
                if (m[a] >= 2) {
                    PolyScalar f = PolyScalar(1) - sys.z(a, a);
                    int pairs = m[a] * (m[a] - 1) / 2;
                    for (int k = 0; k < pairs; ++k) term *= f;
                }
                for (std::size_t b = a + 1; b < m.size(); ++b) {
                    if (m[a] == 0 || m[b] == 0) continue;
                    PolyScalar f = PolyScalar(1) - sys.z(a, b);
                    for (int k = 0; k < m[a] * m[b]; ++k) term *= f;
                }
            }
            order_sum += term;
        });
        rep.value += order_sum;
        rep.order_magnitude[n] = std::abs(order_sum);
    }
    // truncation verdict: last included order should be negligible
    if (rep.order_magnitude[n_poly_max] > 1e-14L * std::max(1.0L, std::abs(rep.value)))
        rep.converged = false;
    return rep;
}

// log Z as the cluster series sum_{n<=K} sum_{sequences} phi(...) prod(weights).
// Only multisets with connected support can contribute (phi vanishes on
// disconnected sequences).
inline SeriesReport log_partition_clusters(const PolymerSystem& sys, int order_cutoff) {
    SeriesReport rep;
    rep.order_magnitude.assign(order_cutoff + 1, 0.0L);
    std::vector<int> mult(sys.size(), 0);
    for (int n = 1; n <= order_cutoff; ++n) {
        PolyScalar order_sum(0);
        long double order_abs = 0;
        detail::for_each_multiset(sys.size(), n, mult, 0, [&](const std::vector<int>& m) {
            if (!detail::support_connected(sys, m)) return;
            auto seq = detail::expand_multiset(m);
            PolyScalar c = (n == 1) ? PolyScalar(1)
                                    : detail::connected_sum<PolyScalar>(
                                          n, [&](int i, int j) { return sys.z(seq[i], seq[j]); });
            // phi * n!/prod(m!) = C / prod(m!)
            PolyScalar term =
                c * detail::weight_power_product(sys, m) / detail::mult_factorials(m);
            order_sum += term;
            order_abs += std::abs(term);
        });
        rep.value += order_sum;
        rep.order_magnitude[n] = order_abs;
    }
    int rising = 0;
    for (int n = 2; n <= order_cutoff; ++n) {
        rising = (rep.order_magnitude[n] > rep.order_magnitude[n - 1]) ? rising + 1 : 0;
        if (rising >= 3) rep.diverging = true;
    }
    return rep;
}

struct KpReport {
    bool satisfied = true;
    std::size_t worst_polymer = 0;
    double slack = 0.0;  // min over polymers of rhs - lhs
};

// Kotecky-Preiss criterion: sum_A' |w(A')| |zeta(A,A')| e^{a(A')} <= a(A).
inline KpReport kp_check(const PolymerSystem& sys) {
    KpReport rep;
    bool first = true;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        long double lhs = 0;
        for (std::size_t j = 0; j < sys.size(); ++j)
            lhs += std::abs(sys.polymers[j].weight) * std::abs(sys.z(i, j)) *
                   std::exp((long double)sys.polymers[j].kp_weight);
        double slack = sys.polymers[i].kp_weight - static_cast<double>(lhs);
        if (first || slack < rep.slack) {
            rep.slack = slack;
            rep.worst_polymer = i;
            first = false;
        }
    }
    rep.satisfied = sys.size() == 0 || rep.slack >= 0;
    return rep;
}

struct ClusterBoundReport {
    long double lhs = 1;
    long double rhs = 1;
    bool satisfied = true;
};

// Left side of the cluster bound, 1 + sum_{n>=2} n sum |phi(A1,...)| prod|w|,
// truncated at order K and compared against e^{a(A1)}.
inline ClusterBoundReport cluster_bound_check(const PolymerSystem& sys, std::size_t root,
                                              int order_cutoff) {
    if (root >= sys.size()) throw std::invalid_argument("cluster_bound_check: bad root");
    ClusterBoundReport rep;
    rep.rhs = std::exp((long double)sys.polymers[root].kp_weight);
    std::vector<int> mult(sys.size(), 0);
    for (int n = 2; n <= order_cutoff; ++n) {
        // choose n-1 additional polymers as a multiset; sequences of them
        // number (n-1)!/prod(m!), and n * (n-1)! / (prod(m!) n!) = 1/prod(m!)
        detail::for_each_multiset(sys.size(), n - 1, mult, 0, [&](const std::vector<int>& m) {
            auto seq = detail::expand_multiset(m);
            seq.insert(seq.begin(), root);
            PolyScalar c = detail::connected_sum<PolyScalar>(
                n, [&](int i, int j) { return sys.z(seq[i], seq[j]); });
            long double w = 1;
            for (std::size_t a = 0; a < m.size(); ++a)
                for (int k = 0; k < m[a]; ++k) w *= std::abs(sys.polymers[a].weight);
            rep.lhs += std::abs(c) * w / detail::mult_factorials(m);
        });
    }
    rep.satisfied = rep.lhs <= rep.rhs;
    return rep;
}

// JSON schema: {polymers:[{id, weight, a}], zeta:[[i, j, value]]}; pairs not
// listed mean zeta = 0. Complex values are [re, im] arrays.
inline nlohmann::json to_json(const PolymerSystem& sys) {
    nlohmann::json j;
    j["polymers"] = nlohmann::json::array();
    for (const auto& p : sys.polymers) {
        nlohmann::json e;
        e["id"] = p.id;
        if (p.weight.imag() == 0.0L)
            e["weight"] = static_cast<double>(p.weight.real());
        else
            e["weight"] = {static_cast<double>(p.weight.real()),
                           static_cast<double>(p.weight.imag())};
        e["a"] = p.kp_weight;
        j["polymers"].push_back(e);
    }
    j["zeta"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t k = i; k < sys.size(); ++k) {
            if (sys.zeta[i][k] == PolyScalar(0)) continue;
            if (sys.zeta[i][k].imag() == 0.0L)
                j["zeta"].push_back({i, k, static_cast<double>(sys.zeta[i][k].real())});
            else
                j["zeta"].push_back({i, k,
                                     {static_cast<double>(sys.zeta[i][k].real()),
                                      static_cast<double>(sys.zeta[i][k].imag())}});
        }
    return j;
}

inline PolyScalar scalar_from_json(const nlohmann::json& v) {
    if (v.is_array()) return PolyScalar(v[0].get<double>(), v[1].get<double>());
    return PolyScalar(v.get<double>());
}

inline PolymerSystem polymer_system_from_json(const nlohmann::json& j) {
    std::vector<Polymer> polys;
    for (const auto& e : j.at("polymers"))
        polys.push_back({e.at("id").get<std::string>(), scalar_from_json(e.at("weight")),
                         e.value("a", 0.0)});
    auto sys = PolymerSystem::make(std::move(polys));
    if (j.contains("zeta"))
        for (const auto& z : j.at("zeta")) {
            std::size_t a = z[0].get<std::size_t>(), b = z[1].get<std::size_t>();
            PolyScalar v = scalar_from_json(z[2]);
            sys.zeta.at(a).at(b) = v;
            sys.zeta.at(b).at(a) = v;
        }
    sys.validate();
    return sys;
}

}  // namespace bhm
