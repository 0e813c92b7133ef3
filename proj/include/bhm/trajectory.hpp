#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhm/model.hpp"
#include "bhm/polymer.hpp"

namespace bhm {

// Closed nearest-neighbor walk wrapping the time circle `winding` times.
// path holds the visited sites including the closing return, so a walk with
// m jumps has path.size() == m + 1; the stationary walk has path == {x}.
struct TrajectorySkeleton {
    std::vector<int> path;
    int winding = 1;

    int jumps() const { return path.empty() ? 0 : int(path.size()) - 1; }
    int base() const { return path.at(0); }
};

inline std::vector<std::vector<int>> lattice_adjacency(const LatticeSpec& lat) {
    std::vector<std::vector<int>> nbr(lat.sites());
    for (auto [a, b] : lat.bonds()) {
        nbr[a].push_back(b);
        nbr[b].push_back(a);
    }
    return nbr;
}

// Sites of Z^d within L1 distance R of the origin, with unit-step adjacency.
struct BallGraph {
    int d = 1, radius = 1;
    std::vector<std::vector<int>> coords;
    std::vector<std::vector<int>> nbr;
    int origin = 0;

    static BallGraph make(int d, int radius) {
        if (d < 1 || radius < 0) throw std::invalid_argument("BallGraph: bad arguments");
        BallGraph g;
        g.d = d;
        g.radius = radius;
        std::map<std::vector<int>, int> index;
        std::vector<int> c(d, -radius);
        // scan the bounding box and keep the L1 ball
        while (true) {
            int l1 = 0;
            for (int v : c) l1 += std::abs(v);
            if (l1 <= radius) {
                index[c] = int(g.coords.size());
                g.coords.push_back(c);
            }
            int k = 0;
            while (k < d && ++c[k] > radius) c[k++] = -radius;
            if (k == d) break;
        }
        g.nbr.resize(g.coords.size());
        for (std::size_t i = 0; i < g.coords.size(); ++i) {
            for (int ax = 0; ax < d; ++ax)
                for (int dir : {-1, 1}) {
                    auto c2 = g.coords[i];
                    c2[ax] += dir;
                    auto it = index.find(c2);
                    if (it != index.end()) g.nbr[i].push_back(it->second);
                }
        }
        g.origin = index.at(std::vector<int>(d, 0));
        return g;
    }
};

namespace detail {

template <typename Emit>
void closed_walk_dfs(const std::vector<std::vector<int>>& nbr, int start, int left,
                     std::vector<int>& path, Emit&& emit) {
    if (left == 0) {
        if (path.back() == start) emit(path);
        return;
    }
    for (int next : nbr[path.back()]) {
        path.push_back(next);
        closed_walk_dfs(nbr, start, left - 1, path, emit);
        path.pop_back();
    }
}

}  // namespace detail

// All closed walks from `start` with exactly `jumps` steps on the given
// adjacency (multi-edges allowed and counted with multiplicity).
template <typename Emit>
void enumerate_trajectories(const std::vector<std::vector<int>>& nbr, int start, int winding,
                            int jumps, Emit&& emit) {
    if (jumps < 0 || winding < 1) throw std::invalid_argument("enumerate_trajectories: bad cutoffs");
    std::vector<int> path = {start};
    detail::closed_walk_dfs(nbr, start, jumps, path, [&](const std::vector<int>& p) {
        TrajectorySkeleton th;
        th.path = p;
        th.winding = winding;
        emit(th);
    });
}

inline std::int64_t count_closed_walks(const std::vector<std::vector<int>>& nbr, int start,
                                       int jumps) {
    std::int64_t n = 0;
    enumerate_trajectories(nbr, start, 1, jumps, [&](const TrajectorySkeleton&) { ++n; });
    return n;
}

// Evenly spaced jump times in (0, winding*beta), the canonical representative
// used when a pairwise overlap needs concrete times.
inline std::vector<double> midpoint_times(const TrajectorySkeleton& th, double beta) {
    int m = th.jumps();
    double T = th.winding * beta;
    std::vector<double> ts(m);
    for (int k = 0; k < m; ++k) ts[k] = (k + 1) * T / (m + 1);
    return ts;
}

namespace detail {

inline int site_at(const TrajectorySkeleton& th, const std::vector<double>& times, double tau) {
    // piecewise constant: site path[k] on [times[k-1], times[k])
    int k = int(std::upper_bound(times.begin(), times.end(), tau) - times.begin());
    return th.path[k];
}

inline std::vector<double> fold_breakpoints(const std::vector<double>& times, double beta,
                                            std::vector<double> acc = {}) {
    acc.push_back(0.0);
    acc.push_back(beta);
    for (double t : times) {
        double f = std::fmod(t, beta);
        if (f > 0 && f < beta) acc.push_back(f);
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    return acc;
}

}  // namespace detail

// Total coincidence time between distinct beta-wraps of one trajectory.
inline double self_intersection_W(const TrajectorySkeleton& th, const std::vector<double>& times,
                                  double beta) {
    int l = th.winding;
    if (l < 2) return 0.0;
    auto bp = detail::fold_breakpoints(times, beta);
    double W = 0;
    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        double mid = 0.5 * (bp[s] + bp[s + 1]), len = bp[s + 1] - bp[s];
        for (int i = 0; i < l; ++i) {
            int si = detail::site_at(th, times, i * beta + mid);
            for (int j = i + 1; j < l; ++j)
                if (si == detail::site_at(th, times, j * beta + mid)) W += len;
        }
    }
    return W;
}

// Total coincidence time between wraps of two different trajectories.
inline double pair_overlap_W(const TrajectorySkeleton& a, const std::vector<double>& ta,
                             const TrajectorySkeleton& b, const std::vector<double>& tb,
                             double beta) {
    auto bp = detail::fold_breakpoints(ta, beta, detail::fold_breakpoints(tb, beta));
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    double W = 0;
    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        double mid = 0.5 * (bp[s] + bp[s + 1]), len = bp[s + 1] - bp[s];
        for (int i = 0; i < a.winding; ++i) {
            int si = detail::site_at(a, ta, i * beta + mid);
            for (int j = 0; j < b.winding; ++j)
                if (si == detail::site_at(b, tb, j * beta + mid)) W += len;
        }
    }
    return W;
}

// Pairwise trajectory interaction 1 - e^{-U W}, with the hard-core limit
// collapsing to an intersection indicator.
inline double zeta_between(const TrajectorySkeleton& a, const TrajectorySkeleton& b,
                           const ModelParams& p) {
    double W = pair_overlap_W(a, midpoint_times(a, p.beta), b, midpoint_times(b, p.beta), p.beta);
    if (p.u_infinite) return W > 0 ? 1.0 : 0.0;
    return 1.0 - std::exp(-p.U * W);
}

struct TrajectoryWeight {
    double value = 0;
    double grid_error = 0;  // time-grid discretization estimate, 0 when exact
};

namespace detail {

inline double factorial_d(int n) {
    double f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Simplex sum over grid-assigned jump times of e^{-U W}; the hard-core limit
// keeps only assignments with no wrap coincidence.
inline double grid_simplex_integral(const TrajectorySkeleton& th, const ModelParams& p,
                                    int slices) {
    int m = th.jumps();
    double T = th.winding * p.beta, dt = T / slices;
    std::vector<double> times(m);
    std::vector<int> idx(m);
    double sum = 0;
    // ordered index tuples i_0 < i_1 < ... < i_{m-1}
    auto rec = [&](auto&& self, int k, int from) -> void {
        if (k == m) {
            double W = self_intersection_W(th, times, p.beta);
            if (p.u_infinite)
                sum += (W > 0 ? 0.0 : 1.0);
            else
                sum += std::exp(-p.U * W);
            return;
        }
        for (int i = from; i < slices - (m - 1 - k); ++i) {
            idx[k] = i;
            times[k] = (i + 0.5) * dt;
            self(self, k + 1, i + 1);
        }
    };
    rec(rec, 0, 0);
    return sum * std::pow(dt, m);
}

}  // namespace detail

// Weight of a trajectory class with the jump times integrated out:
// (1/l) e^{beta mu l} t^m * integral of e^{-U W} over the ordered simplex.
// Single-wrap trajectories have W = 0 and are exact; multi-wrap ones are
// evaluated on a time grid with one Richardson step.
inline TrajectoryWeight trajectory_weight(const TrajectorySkeleton& th, const ModelParams& p,
                                          int grid_slices = 256) {
    int m = th.jumps(), l = th.winding;
    double T = l * p.beta;
    double prefac = std::exp(p.beta * p.mu * l) / l * std::pow(p.t, m);
    TrajectoryWeight out;
    if (l == 1) {
        out.value = prefac * std::pow(T, m) / detail::factorial_d(m);
        return out;
    }
    if (m == 0) {
        // the walk sits on one site, every wrap pair coincides for time beta
        double W = 0.5 * l * (l - 1) * p.beta;
        out.value = p.u_infinite ? 0.0 : prefac * std::exp(-p.U * W);
        return out;
    }
    int M = m <= 2 ? grid_slices : std::max(24, grid_slices / 4);
    double coarse = detail::grid_simplex_integral(th, p, M / 2);
    double fine = detail::grid_simplex_integral(th, p, M);
    out.value = prefac * (2 * fine - coarse);  // first-order Richardson
    out.grid_error = prefac * std::abs(fine - coarse);
    if (out.value < 0) out.value = 0;
    return out;
}

// Convergence weights for the dilute expansion: a = log(1 + s/6dt), b = s/3
// with s = -(mu + 2dt), giving margin mu + 2dt e^a + b = -s/3 < 0.
struct TrajectoryKpParams {
    bool feasible = false;
    double a = 0, b = 0, s = 0, margin = 0;
};

inline TrajectoryKpParams kp_trajectory_params(double t, double mu, int d) {
    TrajectoryKpParams out;
    out.s = -(mu + 2.0 * d * t);
    if (out.s <= 0 || t <= 0) return out;
    out.feasible = true;
    out.a = std::log(1.0 + out.s / (6.0 * d * t));
    out.b = out.s / 3.0;
    out.margin = mu + 2.0 * d * t * std::exp(out.a) + out.b;
    return out;
}

struct ExpansionReport {
    double pressure = 0;
    double truncation_bound = 0;  // tail estimate covering every cutoff
    double log_partition = 0;
    SeriesReport series;
    KpReport kp;
    bool kp_params_feasible = false;
    int n_polymers = 0;
};

// Grand pressure from the closed-trajectory cluster expansion on a finite
// lattice, truncated at `max_jumps` jumps, `max_winding` wraps and cluster
// order `cluster_order`. The truncation_bound adds up: 10x the last cluster
// order, the exponential-series tail of omitted jump counts, the geometric
// tail of omitted windings, grid errors, and an occupation-cap allowance for
// comparisons against capped diagonalization oracles.
inline ExpansionReport truncated_pressure_trajectories(const ModelParams& p, int max_jumps,
                                                       int max_winding, int cluster_order) {
    p.validate();
    const auto nbr = lattice_adjacency(p.lattice);
    const int n_sites = p.lattice.sites();
    auto kpp = kp_trajectory_params(p.t, p.mu, p.lattice.dim);

    std::vector<Polymer> polys;
    std::vector<TrajectorySkeleton> skels;
    double grid_errors = 0;
    for (int x = 0; x < n_sites; ++x)
        for (int l = 1; l <= max_winding; ++l)
            for (int m = 0; m <= max_jumps; ++m)
                enumerate_trajectories(nbr, x, l, m, [&](const TrajectorySkeleton& th) {
                    auto w = trajectory_weight(th, p);
                    grid_errors += w.grid_error;
                    if (w.value == 0) return;
                    Polymer poly;
                    poly.id = "x" + std::to_string(x) + "l" + std::to_string(l) + "m" +
                              std::to_string(m) + "#" + std::to_string(polys.size());
                    poly.weight = PolyScalar((long double)w.value);
                    poly.kp_weight = kpp.feasible ? kpp.a * m + p.beta * kpp.b * l : 1.0;
                    polys.push_back(poly);
                    skels.push_back(th);
                });

    auto sys = PolymerSystem::make(std::move(polys));
    double a_max = 0;
    for (std::size_t i = 0; i < skels.size(); ++i) {
        a_max = std::max(a_max, sys.polymers[i].kp_weight);
        for (std::size_t j = i; j < skels.size(); ++j) {
            double z = zeta_between(skels[i], skels[j], p);
            sys.zeta[i][j] = sys.zeta[j][i] = PolyScalar((long double)z);
        }
    }

    ExpansionReport rep;
    rep.n_polymers = int(sys.size());
    rep.kp_params_feasible = kpp.feasible;
    rep.kp = kp_check(sys);
    rep.series = log_partition_clusters(sys, cluster_order);
    rep.log_partition = double((long double)rep.series.value.real());
    // pressure convention: log Z per site, no 1/beta factor
    rep.pressure = rep.log_partition / n_sites;

    // --- truncation report ---
    double dress = std::exp(a_max);
    double tail_jumps = 0;
    for (int l = 1; l <= max_winding; ++l) {
        double x = 2.0 * p.lattice.dim * p.t * p.beta * l;
        double partial = 0, term = 1;
        for (int m = 0; m <= max_jumps; ++m) {
            partial += term;
            term *= x / (m + 1);
        }
        tail_jumps += std::exp(p.beta * p.mu * l) / l * (std::exp(x) - partial);
    }
    double r = std::exp(p.beta * (p.mu + 2.0 * p.lattice.dim * p.t));
    double tail_winding = r < 1 ? std::pow(r, max_winding + 1) / ((max_winding + 1) * (1 - r))
                                : std::numeric_limits<double>::infinity();
    double tail_cluster = 10.0 * rep.series.order_magnitude.back();
    double cap_allowance = n_sites * std::exp(3.0 * p.beta * p.mu);
    rep.truncation_bound =
        (n_sites * (tail_jumps + tail_winding) * dress + tail_cluster + grid_errors +
         cap_allowance) /
        n_sites;
    return rep;
}

}  // namespace bhm
