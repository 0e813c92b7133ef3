#pragma once

// Test-only oracle: nested Gauss-Legendre quadrature over the ordered time
// simplex. Independent of the divided-difference implementation.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct GaussLegendre {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]

    explicit GaussLegendre(int n) {
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                // Legendre P_n and derivative by recurrence
                double p0 = 1, p1 = xi;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (xi * p1 - p0) / (xi * xi - 1);
                double dx = p1 / dp;
                xi -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            x[i] = xi;
            double p0 = 1, p1 = xi;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (xi * p1 - p0) / (xi * xi - 1);
            w[i] = 2.0 / ((1 - xi * xi) * dp * dp);
        }
    }
};

// integral over 0 < tau_1 < ... < tau_m < T of exp(-sum E_k dtau_k)
inline double simplex_integral_quadrature(const std::vector<double>& energies, double T,
                                          int points = 24) {
    const int m = static_cast<int>(energies.size()) - 1;
    if (m == 0) return std::exp(-energies[0] * T);
    static thread_local std::vector<GaussLegendre> cache;
    while (static_cast<int>(cache.size()) <= points) cache.emplace_back((int)cache.size() + 1);
    const GaussLegendre& gl = cache[points - 1];

    std::vector<double> tau(m + 2);
    tau[0] = 0;
    tau[m + 1] = T;
    std::function<double(int, double)> rec = [&](int level, double lower) -> double {
        // integrate tau_level over [lower, T]; deeper levels handle the rest
        double a = lower, b = T;
        double acc = 0;
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            double ti = 0.5 * (b - a) * gl.x[i] + 0.5 * (a + b);
            tau[level] = ti;
            double inner;
            if (level == m) {
                double expo = 0;
                for (int k = 0; k <= m; ++k) expo -= energies[k] * (tau[k + 1] - tau[k]);
                inner = std::exp(expo);
            } else {
                inner = rec(level + 1, ti);
            }
            acc += gl.w[i] * inner;
        }
        return acc * 0.5 * (b - a);
    };
    return rec(1, 0.0);
}

}  // namespace oracle
