#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhm/bounds.hpp"
#include "bhm/fock.hpp"
#include "bhm/model.hpp"
#include "bhm/polymer.hpp"
#include "bhm/simplex.hpp"

namespace bhm {

// All times live on the unit circle [0,1) in units of beta and are kept as
// exact rationals so vertical-length identities hold without rounding.

// A boson jumps from site y to site x at time tau.
struct LoopJump {
    Rational tau;
    int x = 0, y = 0;
};

// Maximal vertical excitation interval at one site: occupation `occ` (0 or 2)
// on [start, start+len) mod 1, with len == 1 meaning the full circle.
struct LoopSegment {
    int site = 0;
    Rational start{0};
    Rational len{0};
    int occ = 1;

    bool covers_zero() const {
        return len == Rational(1) || (start + len > Rational(1)) ||
               (start == Rational(0) && len > Rational(0));
    }
};

struct Loop {
    std::vector<LoopJump> jumps;      // time-ordered
    std::vector<LoopSegment> segments;
    Rational l0{0}, l2{0};            // down/up vertical lengths in beta units

    int n_jumps() const { return int(jumps.size()); }
    Rational length() const { return l0 + l2; }
    int winding() const {
        Rational z = l2 - l0;
        if (z.den != 1) throw std::logic_error("Loop: l2 - l0 is not an integer multiple of beta");
        return int(z.num);
    }
    std::vector<int> support() const {
        std::set<int> s;
        for (const auto& seg : segments) s.insert(seg.site);
        return {s.begin(), s.end()};
    }
};

// Periodic space-time configuration over occupations {0,1,2}.
struct QuantumConfig {
    int sites = 0;
    OccupationConfig initial;          // occupation at time 0
    std::vector<LoopJump> events;      // time-ordered, distinct times
};

namespace detail {

inline void check_config_times(const QuantumConfig& cfg) {
    for (std::size_t i = 0; i < cfg.events.size(); ++i) {
        const auto& e = cfg.events[i];
        if (e.tau <= Rational(0) || e.tau >= Rational(1))
            throw std::invalid_argument("config: event time outside (0,1)");
        if (i > 0 && !(cfg.events[i - 1].tau < e.tau))
            throw std::invalid_argument("config: event times must be strictly increasing");
        if (e.x == e.y || e.x < 0 || e.y < 0 || e.x >= cfg.sites || e.y >= cfg.sites)
            throw std::invalid_argument("config: bad jump sites");
    }
}

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

// Occupation of every site through time; throws when the configuration
// violates the occupation cap or the periodicity requirement.
inline std::vector<OccupationConfig> config_timeline(const QuantumConfig& cfg) {
    detail::check_config_times(cfg);
    if (int(cfg.initial.size()) != cfg.sites)
        throw std::invalid_argument("config: initial size mismatch");
    std::vector<OccupationConfig> states;
    OccupationConfig n = cfg.initial;
    for (auto v : n)
        if (v > 2) throw std::invalid_argument("config: occupation outside {0,1,2}");
    states.push_back(n);
    for (const auto& e : cfg.events) {
        if (n[e.y] == 0 || n[e.x] == 2)
            throw std::invalid_argument("config: jump violates occupation bounds");
        --n[e.y];
        ++n[e.x];
        states.push_back(n);
    }
    if (n != cfg.initial) throw std::invalid_argument("config: not periodic in time");
    return states;
}

// Split the configuration into its connected excitation loops.
inline std::vector<Loop> decompose_config_to_loops(const QuantumConfig& cfg) {
    auto states = config_timeline(cfg);
    const int m = int(cfg.events.size());

    // per site: excitation segments, each tagged with the event indices that
    // delimit it (-1 for a boundary that wraps with no event, i.e. none)
    struct RawSeg {
        LoopSegment seg;
        int start_event = -1, end_event = -1;
    };
    std::vector<RawSeg> segs;

    for (int s = 0; s < cfg.sites; ++s) {
        std::vector<int> evs;  // indices of events touching site s, time-ordered
        for (int i = 0; i < m; ++i)
            if (cfg.events[i].x == s || cfg.events[i].y == s) evs.push_back(i);
        if (evs.empty()) {
            if (cfg.initial[s] != 1) {
                RawSeg r;
                r.seg = {s, Rational(0), Rational(1), int(cfg.initial[s])};
                segs.push_back(r);
            }
            continue;
        }
        // occupation on the interval starting at event evs[k]
        auto occ_after = [&](int k) { return int(states[evs[k] + 1][s]); };
        for (std::size_t k = 0; k < evs.size(); ++k) {
            int occ = occ_after(int(k));
            if (occ == 1) continue;
            std::size_t k2 = (k + 1) % evs.size();
            Rational t0 = cfg.events[evs[k]].tau;
            Rational t1 = cfg.events[evs[k2]].tau;
            Rational len = (t1 > t0) ? t1 - t0 : t1 - t0 + Rational(1);
            RawSeg r;
            r.seg = {s, t0, len, occ};
            r.start_event = evs[k];
            r.end_event = evs[k2];
            segs.push_back(r);
        }
    }

    detail::DisjointSets ds(int(segs.size()));
    std::vector<int> event_seg(m, -1);  // any segment index incident to each event
    for (int i = 0; i < int(segs.size()); ++i)
        for (int ev : {segs[i].start_event, segs[i].end_event})
            if (ev >= 0) {
                if (event_seg[ev] >= 0)
                    ds.unite(i, event_seg[ev]);
                event_seg[ev] = ds.find(i);
            }
    // refresh representatives after unions
    for (int ev = 0; ev < m; ++ev)
        if (event_seg[ev] >= 0) event_seg[ev] = ds.find(event_seg[ev]);

    std::vector<Loop> loops;
    std::vector<int> root_of;
    for (int i = 0; i < int(segs.size()); ++i) {
        int r = ds.find(i);
        int idx = -1;
        for (std::size_t k = 0; k < root_of.size(); ++k)
            if (root_of[k] == r) idx = int(k);
        if (idx < 0) {
            idx = int(loops.size());
            root_of.push_back(r);
            loops.emplace_back();
        }
        loops[idx].segments.push_back(segs[i].seg);
        if (segs[i].seg.occ == 0)
            loops[idx].l0 += segs[i].seg.len;
        else
            loops[idx].l2 += segs[i].seg.len;
    }
    for (int ev = 0; ev < m; ++ev) {
        if (event_seg[ev] < 0) throw std::logic_error("decompose: dangling jump event");
        int r = event_seg[ev];
        for (std::size_t k = 0; k < root_of.size(); ++k)
            if (root_of[k] == r) loops[k].jumps.push_back(cfg.events[ev]);
    }
    for (auto& lp : loops) lp.winding();  // assert the integer-winding identity
    return loops;
}

// Rebuild the configuration from vertex-disjoint loops.
inline QuantumConfig compose_loops(const std::vector<Loop>& loops, int sites) {
    QuantumConfig cfg;
    cfg.sites = sites;
    cfg.initial.assign(sites, 1);
    std::vector<std::vector<LoopSegment>> by_site(sites);
    for (const auto& lp : loops) {
        for (const auto& seg : lp.segments) {
            by_site.at(seg.site).push_back(seg);
            if (seg.covers_zero()) {
                if (cfg.initial[seg.site] != 1)
                    throw std::invalid_argument("compose: overlapping segments at time 0");
                cfg.initial[seg.site] = std::uint8_t(seg.occ);
            }
        }
        for (const auto& jp : lp.jumps) cfg.events.push_back(jp);
    }
    std::sort(cfg.events.begin(), cfg.events.end(),
              [](const LoopJump& a, const LoopJump& b) { return a.tau < b.tau; });
    for (std::size_t i = 0; i + 1 < cfg.events.size(); ++i)
        if (cfg.events[i].tau == cfg.events[i + 1].tau)
            throw std::invalid_argument("compose: coinciding jump times");
    config_timeline(cfg);  // full validation (also catches segment overlap)
    return cfg;
}

// On-site diagonal energy of a classical configuration relative to nothing:
// V(n) = sum_x U/2 n(n-1) - mu n.
inline double diagonal_energy(const OccupationConfig& n, const ModelParams& p) {
    double v = 0;
    for (auto occ : n) v += p.onsite_energy(int(occ));
    return v;
}

// Weight of a full space-time configuration:
// e^{-int V} prod_i t sqrt(n_{x_i}(tau_i+) n_{y_i}(tau_i-)).
inline double config_weight(const QuantumConfig& cfg, const ModelParams& p) {
    auto states = config_timeline(cfg);
    const int m = int(cfg.events.size());
    double log_w = 0;
    for (int i = 0; i <= m; ++i) {
        Rational t0 = (i == 0) ? Rational(0) : cfg.events[i - 1].tau;
        Rational t1 = (i == m) ? Rational(1) : cfg.events[i].tau;
        log_w -= diagonal_energy(states[i], p) * (t1 - t0).value() * p.beta;
    }
    double jumps = 1;
    for (int i = 0; i < m; ++i) {
        const auto& e = cfg.events[i];
        jumps *= p.t * std::sqrt(double(states[i][e.y]) * double(states[i + 1][e.x]));
    }
    return std::exp(log_w) * jumps;
}

// Weight of a single loop relative to the all-ones background:
// t^j prod sqrt(n n) e^{-l0 mu beta} e^{-l2 (U-mu) beta}.
inline double loop_weight(const Loop& lp, const ModelParams& p) {
    double sq = 1;
    for (const auto& jp : lp.jumps) {
        // occupation before the jump at the source, after it at the target:
        // 2 when the incident segment there is a doublon, else 1
        int ny = 1, nx = 1;
        for (const auto& seg : lp.segments) {
            if (seg.occ != 2) continue;
            Rational end = seg.start + seg.len;
            if (end >= Rational(1)) end -= Rational(1);
            if (seg.site == jp.y && end == jp.tau) ny = 2;
            if (seg.site == jp.x && seg.start == jp.tau) nx = 2;
        }
        sq *= std::sqrt(double(ny) * double(nx));
    }
    double expo = -lp.l0.value() * p.beta * p.mu - lp.l2.value() * p.beta * (p.U - p.mu);
    return std::pow(p.t, lp.n_jumps()) * sq * std::exp(expo);
}

// ---------------------------------------------------------------------------
// Truncated sigma kernel: the effective one-hole hopping amplitude obtained
// by resumming backtracking excursions. One-jump excursions carry
// t e^{2^14 d t^2/U^2}; excursions of m >= 2 jumps carry, per nearest-neighbor
// walk, 2^{m-2} (4t)^m (4/U)^{m-1}.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Visit>
void ball_walk_dfs(int d, int radius, int max_jumps, std::vector<int>& pos, int depth,
                   Visit&& visit) {
    if (depth > 0) visit(depth, pos);
    if (depth == max_jumps) return;
    for (int ax = 0; ax < d; ++ax)
        for (int dir : {-1, 1}) {
            pos[ax] += dir;
            int l1 = 0;
            for (int v : pos) l1 += std::abs(v);
            if (l1 <= radius) ball_walk_dfs(d, radius, max_jumps, pos, depth + 1, visit);
            pos[ax] -= dir;
        }
}

}  // namespace detail

inline double sigma_excursion_term(int m, int d, double t, double U) {
    if (m == 1) return t * jump_weight_exponential(d, t, U);
    return std::pow(2.0, m - 2) * std::pow(4.0 * t, m) * std::pow(4.0 / U, m - 1);
}

// sigma_{0y} truncated at max_jumps jumps and L1 radius `radius`.
inline double hopping_matrix_sigma(const std::vector<int>& target, int d, double t, double U,
                                   int max_jumps, int radius) {
    if (int(target.size()) != d) throw std::invalid_argument("sigma: target dimension mismatch");
    double total = 0;
    std::vector<int> pos(d, 0);
    detail::ball_walk_dfs(d, radius, max_jumps, pos, 0, [&](int m, const std::vector<int>& at) {
        if (at == target) total += sigma_excursion_term(m, d, t, U);
    });
    return total;
}

// sum over y != 0 of the truncated sigma_{0y}.
inline double sigma_row_sum(int d, double t, double U, int max_jumps, int radius) {
    double total = 0;
    std::vector<int> pos(d, 0), origin(d, 0);
    detail::ball_walk_dfs(d, radius, max_jumps, pos, 0, [&](int m, const std::vector<int>& at) {
        if (at != origin) total += sigma_excursion_term(m, d, t, U);
    });
    return total;
}

// ---------------------------------------------------------------------------
// Loop-class enumeration on a finite lattice and the truncated loop-gas
// expansion of pressure and density. A class fixes the time-0 excitation
// pattern and the ordered jump locations; the jump times are integrated out
// exactly through the ordered-simplex exponential integral.
// ---------------------------------------------------------------------------

struct LoopClass {
    OccupationConfig state0;                  // occupations at time 0
    std::vector<std::pair<int, int>> jumps;   // ordered (x, y): boson y -> x
    double weight = 0;                        // time-integrated loop weight
    double dressed_weight = 0;                // time integral of w(gamma) e^{a(gamma)}
    double kp_a = 0;                          // min over jump times of a(gamma)
    int winding = 0;
    std::vector<int> support;
};

namespace detail {

inline double excitation_energy(const OccupationConfig& n, const ModelParams& p) {
    // energy relative to the all-ones background: holes cost mu, doublons U-mu
    double e = 0;
    for (auto occ : n) {
        if (occ == 0) e += p.mu;
        if (occ == 2) e += p.U - p.mu;
    }
    return e;
}

inline int excited_count(const OccupationConfig& n) {
    int c = 0;
    for (auto occ : n) c += (occ != 1);
    return c;
}

}  // namespace detail

// Enumerates every single-loop class with at most max_jumps jumps on the
// lattice. Cost grows as 3^sites * (2*bonds)^max_jumps; intended for desk-
// scale lattices only.
template <typename Emit>
void enumerate_loop_classes(const ModelParams& p, int max_jumps, Emit&& emit) {
    p.validate();
    if (p.u_infinite || p.U <= 0 || p.n_max != 2)
        throw std::invalid_argument("loop classes: require soft core with U > 0 and n_max = 2");
    const int n_sites = p.lattice.sites();
    if (n_sites > 12) throw std::invalid_argument("enumerate_loop_classes: lattice too large");
    auto bonds = p.lattice.bonds();

    auto handle_candidate = [&](const OccupationConfig& s0,
                                const std::vector<std::pair<int, int>>& jumps,
                                const std::vector<OccupationConfig>& states) {
        // placeholder times; the class identity does not depend on them
        QuantumConfig cfg;
        cfg.sites = n_sites;
        cfg.initial = s0;
        int j = int(jumps.size());
        for (int i = 0; i < j; ++i)
            cfg.events.push_back({Rational(i + 1, j + 1), jumps[i].first, jumps[i].second});
        auto loops = decompose_config_to_loops(cfg);
        if (loops.size() != 1) return;

        LoopClass cls;
        cls.state0 = s0;
        cls.jumps = jumps;
        cls.winding = loops[0].winding();
        cls.support = loops[0].support();

        // a(gamma) = c1 j + c2 l; the l-dependent factor is folded into the
        // time integral exactly by shifting the interval energies, and the
        // criterion's right side uses the smallest l any member can have
        const double c1 = kp_loop_functional(1, 0, p.lattice.dim, p.t, p.U);
        const double c2 = kp_loop_functional(0, 1, p.lattice.dim, p.t, p.U);
        std::vector<double> energies(j + 1), shifted(j + 1);
        int min_excited = n_sites + 1;
        for (int i = 0; i <= j; ++i) {
            int exc = detail::excited_count(states[i]);
            energies[i] = detail::excitation_energy(states[i], p);
            shifted[i] = energies[i] - c2 * exc;
            min_excited = std::min(min_excited, exc);
        }
        double sq = 1;
        for (int i = 0; i < j; ++i)
            sq *= std::sqrt(double(states[i][jumps[i].second]) *
                            double(states[i + 1][jumps[i].first]));
        cls.weight = std::pow(p.t, j) * sq * simplex_exp_integral(energies, p.beta);
        cls.dressed_weight =
            std::pow(p.t, j) * sq * std::exp(c1 * j) * simplex_exp_integral(shifted, p.beta);
        cls.kp_a = c1 * j + c2 * p.beta * min_excited;
        emit(cls);
    };

    // all time-0 states, then DFS over jump sequences returning to the start
    OccupationConfig s0(n_sites, 0);
    auto next_state = [&](OccupationConfig& n) {
        for (int s = 0; s < n_sites; ++s) {
            if (n[s] < 2) {
                ++n[s];
                return true;
            }
            n[s] = 0;
        }
        return false;
    };
    do {
        std::vector<OccupationConfig> states = {s0};
        std::vector<std::pair<int, int>> jumps;
        if (detail::excited_count(s0) > 0) handle_candidate(s0, jumps, states);
        auto dfs = [&](auto&& self) -> void {
            if (int(jumps.size()) == max_jumps) return;
            for (auto [a, b] : bonds)
                for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                    auto& cur = states.back();
                    if (cur[y] == 0 || cur[x] == 2) continue;
                    OccupationConfig nxt = cur;
                    --nxt[y];
                    ++nxt[x];
                    jumps.push_back({x, y});
                    states.push_back(nxt);
                    if (nxt == s0) handle_candidate(s0, jumps, states);
                    self(self);
                    jumps.pop_back();
                    states.pop_back();
                }
        };
        dfs(dfs);
    } while (next_state(s0));
}

struct LoopExpansionReport {
    double pressure = 0;
    double density_deviation_bound = 0;  // upper bound on |rho - 1|
    double truncation_bound = 0;
    double log_partition_excitations = 0;
    SeriesReport series;
    KpReport kp;
    int n_polymers = 0;
};

// Pressure and density-deviation bound from the loop-gas cluster expansion,
// truncated at max_jumps jumps per loop and cluster order cluster_order.
inline LoopExpansionReport truncated_pressure_loops(const ModelParams& p, int max_jumps,
                                                    int cluster_order) {
    const int n_sites = p.lattice.sites();
    std::vector<Polymer> polys;
    std::vector<LoopClass> classes;
    enumerate_loop_classes(p, max_jumps, [&](const LoopClass& cls) {
        Polymer poly;
        poly.id = "loop" + std::to_string(polys.size());
        poly.weight = PolyScalar((long double)cls.weight);
        poly.kp_weight = cls.kp_a;
        polys.push_back(poly);
        classes.push_back(cls);
    });
    auto sys = PolymerSystem::make(std::move(polys));
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i; j < classes.size(); ++j) {
            bool overlap = false;
            for (int s : classes[i].support)
                if (std::find(classes[j].support.begin(), classes[j].support.end(), s) !=
                    classes[j].support.end())
                    overlap = true;
            sys.zeta[i][j] = sys.zeta[j][i] = PolyScalar(overlap ? 1.0L : 0.0L);
        }

    LoopExpansionReport rep;
    rep.n_polymers = int(sys.size());
    rep.series = log_partition_clusters(sys, cluster_order);
    rep.log_partition_excitations = double((long double)rep.series.value.real());
    rep.pressure = p.beta * p.mu + rep.log_partition_excitations / n_sites;

    // convergence criterion with the exact length-dependent dressing on the
    // left and each class's minimal functional value on the right
    rep.kp.satisfied = true;
    bool first = true;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        double lhs = 0;
        for (std::size_t j = 0; j < classes.size(); ++j)
            if (std::abs(sys.z(i, j)) > 0.0L) lhs += classes[j].dressed_weight;
        double slack = classes[i].kp_a - lhs;
        if (first || slack < rep.kp.slack) {
            rep.kp.slack = slack;
            rep.kp.worst_polymer = i;
            first = false;
        }
    }
    rep.kp.satisfied = classes.empty() || rep.kp.slack >= 0;

    double dev = 0;
    for (const auto& cls : classes)
        dev += p.beta * std::abs(cls.winding) * cls.dressed_weight;
    rep.density_deviation_bound = dev / n_sites;

    // tail report, three parts:
    //  - the geometric jump-count series bounds the total dressed weight of
    //    loops with > max_jumps jumps attached to one site (term k covers
    //    2k + 2 jumps; a headroom factor of 4 absorbs odd jump counts)
    //  - interacting pairs use the site-sharing indicator in place of the
    //    exact vertical-intersection factor, which discards some compatible
    //    pairs; their total product weight bounds that error
    //  - 10x the magnitude of the last included cluster order
    double jump_tail = std::numeric_limits<double>::infinity();
    double ratio = geometric_loop_series_ratio(p.lattice.dim, p.t, p.U);
    if (ratio < 1) {
        int k0 = std::max(0, max_jumps / 2);  // first omitted even jump count is 2 k0 + 2
        jump_tail = 4.0 * double(kC10) * p.lattice.dim * p.t * p.t / p.U *
                    std::pow(ratio, k0) / (1 - ratio);
    }
    double pair_exclusion = 0;
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i; j < classes.size(); ++j)
            if (std::abs(sys.z(i, j)) > 0.0L)
                pair_exclusion += classes[i].dressed_weight * classes[j].dressed_weight;
    double tail_cluster = 10.0 * rep.series.order_magnitude.back();
    rep.truncation_bound = jump_tail + (pair_exclusion + tail_cluster) / n_sites;
    return rep;
}

inline double density_deviation_loops(const ModelParams& p, int max_jumps, int cluster_order) {
    return truncated_pressure_loops(p, max_jumps, cluster_order).density_deviation_bound;
}

}  // namespace bhm
