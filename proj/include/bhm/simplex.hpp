#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bhm {

// Integral of exp(-sum_k E_k dtau_k) over the ordered simplex
// 0 < tau_1 < ... < tau_m < T, with one energy per interval (m+1 energies).
// Equals T^m times the divided difference of exp over the nodes -E_k T.
//
// The closed form cancels catastrophically near degeneracies, so below
// eps_deg = 1e-8 max|E| the confluent series
//   exp[y_1..y_n] = e^{ybar} sum_k h_k(y - ybar) / (k + n - 1)!
// (h_k the complete homogeneous symmetric polynomials) is used instead.
inline double simplex_exp_integral(const std::vector<double>& energies, double T) {
    if (energies.empty()) throw std::invalid_argument("simplex_exp_integral: no energies");
    if (T < 0) throw std::invalid_argument("simplex_exp_integral: negative time");
    const std::size_t m = energies.size() - 1;
    if (m == 0) return std::exp(-energies[0] * T);

    std::vector<long double> y(energies.size());
    long double max_abs_e = 0;
    for (std::size_t i = 0; i <= m; ++i) {
        y[i] = -static_cast<long double>(energies[i]) * T;
        max_abs_e = std::max(max_abs_e, std::abs((long double)energies[i]));
    }
    const long double eps_deg = 1e-8L * max_abs_e;
    bool degenerate = false;
    for (std::size_t i = 0; i <= m && !degenerate; ++i)
        for (std::size_t j = i + 1; j <= m; ++j)
            if (std::abs(energies[i] - energies[j]) < eps_deg || energies[i] == energies[j]) {
                degenerate = true;
                break;
            }

    long double dd;
    if (!degenerate) {
        // recursive divided-difference table over f(y) = e^y
        std::vector<long double> col(m + 1);
        for (std::size_t i = 0; i <= m; ++i) col[i] = std::exp(y[i]);
        for (std::size_t level = 1; level <= m; ++level)
            for (std::size_t i = 0; i + level <= m; ++i)
                col[i] = (col[i + 1] - col[i]) / (y[i + level] - y[i]);
        dd = col[0];
    } else {
        long double ybar = 0;
        for (auto v : y) ybar += v;
        ybar /= (m + 1);
        std::vector<long double> delta(y.size());
        for (std::size_t i = 0; i <= m; ++i) delta[i] = y[i] - ybar;
        // h_k up to order K via h_k(x_1..x_j) = h_k(x_1..x_{j-1}) + x_j h_{k-1}(x_1..x_j);
        // K grows until the factorial tail is negligible.
        const std::size_t max_terms = 512;
        std::size_t K = 32;
        long double result = 0;
        for (;;) {
            std::vector<long double> hh(K + 1, 0.0L);
            hh[0] = 1.0L;
            for (std::size_t j = 0; j <= m; ++j)
                for (std::size_t k = 1; k <= K; ++k) hh[k] += delta[j] * hh[k - 1];
            long double fact = 1.0L;
            for (std::size_t k = 1; k <= m; ++k) fact *= k;
            long double acc = 0, term_mag_last = 0;
            for (std::size_t k = 0; k <= K; ++k) {
                long double term = hh[k] / fact;
                acc += term;
                term_mag_last = std::abs(term);
                fact *= (m + k + 1);
            }
            if (term_mag_last <= 1e-24L * std::max((long double)1.0L, std::abs(acc)) ||
                K >= max_terms) {
                result = acc;
                break;
            }
            K *= 2;
        }
        dd = std::exp(ybar) * result;
    }
    long double scale = 1.0L;
    for (std::size_t k = 0; k < m; ++k) scale *= T;
    long double out = scale * dd;
    return out < 0 ? 0.0 : static_cast<double>(out);
}

}  // namespace bhm
