#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bhm/model.hpp"

namespace bhm {

using OccupationConfig = std::vector<std::uint8_t>;

inline int total_particles(const OccupationConfig& n) {
    return std::accumulate(n.begin(), n.end(), 0);
}

struct FockBasis {
    std::vector<OccupationConfig> configs;   // lexicographic order
    std::unordered_map<std::uint64_t, std::size_t> index;  // encoded config -> row
    int n_max = 1;
    int sites = 1;

    static std::uint64_t encode(const OccupationConfig& n, int n_max) {
        std::uint64_t code = 0;
        const std::uint64_t radix = static_cast<std::uint64_t>(n_max) + 1;
        for (std::size_t i = 0; i < n.size(); ++i) code = code * radix + n[i];
        return code;
    }

    std::size_t find(const OccupationConfig& n) const {
        auto it = index.find(encode(n, n_max));
        if (it == index.end()) throw std::out_of_range("FockBasis: config not in basis");
        return it->second;
    }

    std::size_t size() const { return configs.size(); }
};

struct Sector {
    bool grand = true;
    int n_particles = 0;
    static Sector grand_canonical() { return {true, 0}; }
    static Sector fixed(int n) { return {false, n}; }
};

// Deterministic lexicographic enumeration of occupation configurations under
// the cap, optionally restricted to a fixed particle number.
inline FockBasis build_basis(const ModelParams& params, Sector sector = Sector::grand_canonical()) {
    params.validate();
    const int sites = params.lattice.sites();
    // the mixed-radix encoding must fit in 64 bits
    double bits = sites * std::log2(double(params.n_max) + 1);
    if (bits > 63)
        throw std::invalid_argument("build_basis: occupation encoding exceeds 64 bits");
    if (!sector.grand &&
        (sector.n_particles < 0 || sector.n_particles > params.n_max * sites))
        throw std::invalid_argument("build_basis: particle number out of range");

    FockBasis basis;
    basis.n_max = params.n_max;
    basis.sites = sites;
    OccupationConfig cur(sites, 0);
    while (true) {
        if (sector.grand || total_particles(cur) == sector.n_particles) {
            basis.index.emplace(FockBasis::encode(cur, params.n_max), basis.configs.size());
            basis.configs.push_back(cur);
        }
        int k = sites - 1;
        while (k >= 0 && cur[k] == params.n_max) { cur[k] = 0; --k; }
        if (k < 0) break;
        ++cur[k];
    }
    return basis;
}

struct OffDiagEntry {
    std::size_t row, col;
    double amplitude;
};

// Matrix of H - mu N in the given basis: diagonal V(n) - mu N(n), hopping
// entries -t sqrt(n_x+1) sqrt(n_y) for a hop y -> x evaluated on the source
// configuration. Every entry is stored together with its transpose partner.
struct SparseHamiltonian {
    const FockBasis* basis = nullptr;
    std::vector<double> diagonal;
    std::vector<OffDiagEntry> offdiag;

    Eigen::MatrixXd dense() const {
        const std::size_t n = diagonal.size();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = diagonal[i];
        for (const auto& e : offdiag) m(e.row, e.col) += e.amplitude;
        return m;
    }

    // y = H x for the iterative path.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = diagonal.size();
        for (std::size_t i = 0; i < n; ++i) y[i] = diagonal[i] * x[i];
        for (const auto& e : offdiag) y[e.row] += e.amplitude * x[e.col];
    }
};

inline SparseHamiltonian build_hamiltonian(const ModelParams& params, const FockBasis& basis) {
    SparseHamiltonian h;
    h.basis = &basis;
    h.diagonal.resize(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double v = 0;
        for (auto n : basis.configs[i]) v += params.onsite_energy(n);
        h.diagonal[i] = v;
    }
    if (params.t == 0.0) return h;
    const auto bonds = params.lattice.bonds();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& n = basis.configs[i];
        for (const auto& [a, b] : bonds) {
            // hop b -> a and hop a -> b
            for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                if (n[y] == 0 || n[x] == params.n_max) continue;
                OccupationConfig m = n;
                ++m[x]; --m[y];
                auto it = basis.index.find(FockBasis::encode(m, params.n_max));
                if (it == basis.index.end()) continue;  // outside a fixed-N basis never happens
                double amp = -params.t * std::sqrt(double(n[x] + 1)) * std::sqrt(double(n[y]));
                h.offdiag.push_back({it->second, i, amp});
            }
        }
    }
    return h;
}

inline constexpr std::size_t kDenseThreshold = 4096;
inline constexpr double kEigResidualTol = 1e-10;

inline std::vector<double> dense_eigenvalues(const SparseHamiltonian& h) {
    if (h.diagonal.size() > kDenseThreshold)
        throw std::invalid_argument("dense_eigenvalues: dimension above dense threshold");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(), Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + h.diagonal.size());
    return ev;
}

// Lanczos with full reorthogonalization for the lowest eigenvalue; used when
// a canonical sector exceeds the dense threshold.
inline double lanczos_lowest(const SparseHamiltonian& h, int max_iter = 300) {
    const std::size_t n = h.diagonal.size();
    std::vector<std::vector<double>> v;
    std::vector<double> alpha, betav;
    std::vector<double> w(n), cur(n);
    // deterministic start vector
    for (std::size_t i = 0; i < n; ++i) cur[i] = 1.0 / std::sqrt(double(n));
    v.push_back(cur);
    double lowest = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < max_iter; ++it) {
        h.apply(v.back(), w);
        double a = std::inner_product(w.begin(), w.end(), v.back().begin(), 0.0);
        alpha.push_back(a);
        for (const auto& u : v) {
            double c = std::inner_product(w.begin(), w.end(), u.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
        }
        double b = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        // tridiagonal eigenvalue
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) tri(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) { tri(i, i + 1) = betav[i]; tri(i + 1, i) = betav[i]; }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        double next = es.eigenvalues()(0);
        // residual estimate |beta_m * last component of ritz vector|
        double resid = b * std::abs(es.eigenvectors()(m - 1, 0));
        if (it > 2 && resid < kEigResidualTol) return next;
        lowest = next;
        if (b < 1e-14) return lowest;  // invariant subspace exhausted
        betav.push_back(b);
        for (std::size_t i = 0; i < n; ++i) w[i] /= b;
        v.push_back(w);
    }
    throw std::runtime_error("lanczos_lowest: no convergence, residual above tolerance");
}

// Per-sector spectra of H (without the -mu N shift, which is applied at
// evaluation time so one diagonalization serves a mu-sweep).
struct GrandSpectrum {
    struct SectorData {
        int n_particles;
        std::vector<double> eigenvalues;  // of V + T with mu = 0
    };
    std::vector<SectorData> sectors;
    int volume = 1;
};

inline GrandSpectrum grand_spectrum(const ModelParams& params) {
    params.validate();
    ModelParams p0 = params;
    p0.mu = 0.0;
    GrandSpectrum out;
    out.volume = params.lattice.sites();
    const int n_total = params.n_max * out.volume;
    for (int N = 0; N <= n_total; ++N) {
        auto basis = build_basis(p0, Sector::fixed(N));
        if (basis.size() > kDenseThreshold)
            throw std::invalid_argument(
                "grand_spectrum: sector exceeds dense threshold, reduce the lattice");
        auto h = build_hamiltonian(p0, basis);
        out.sectors.push_back({N, dense_eigenvalues(h)});
    }
    return out;
}

// log Z via max-shifted log-sum-exp over the full spectrum of H - mu N.
inline double log_grand_partition(const GrandSpectrum& spec, double mu, double beta) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& s : spec.sectors)
        for (double e : s.eigenvalues)
            mx = std::max(mx, -beta * (e - mu * s.n_particles));
    double acc = 0;
    for (const auto& s : spec.sectors)
        for (double e : s.eigenvalues)
            acc += std::exp(-beta * (e - mu * s.n_particles) - mx);
    return mx + std::log(acc);
}

inline double log_grand_partition(const ModelParams& params) {
    return log_grand_partition(grand_spectrum(params), params.mu, params.beta);
}

inline double grand_partition(const ModelParams& params) {
    return std::exp(log_grand_partition(params));
}

inline double pressure_ed(const GrandSpectrum& spec, double mu, double beta) {
    return log_grand_partition(spec, mu, beta) / spec.volume;
}

inline double pressure_ed(const ModelParams& params) {
    return pressure_ed(grand_spectrum(params), params.mu, params.beta);
}

// <N>/|Lambda| from the exact thermal expectation, not finite differences.
inline double density_ed(const GrandSpectrum& spec, double mu, double beta) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& s : spec.sectors)
        for (double e : s.eigenvalues)
            mx = std::max(mx, -beta * (e - mu * s.n_particles));
    double z = 0, zn = 0;
    for (const auto& s : spec.sectors)
        for (double e : s.eigenvalues) {
            double w = std::exp(-beta * (e - mu * s.n_particles) - mx);
            z += w;
            zn += w * s.n_particles;
        }
    return zn / z / spec.volume;
}

inline double density_ed(const ModelParams& params) {
    return density_ed(grand_spectrum(params), params.mu, params.beta);
}

// Lowest eigenvalue of H - mu N in the fixed-N sector, per site.
inline double ground_energy_density(const ModelParams& params, int n_particles) {
    params.validate();
    auto basis = build_basis(params, Sector::fixed(n_particles));
    if (basis.size() == 0) throw std::invalid_argument("ground_energy_density: empty sector");
    auto h = build_hamiltonian(params, basis);
    double e0;
    if (basis.size() <= kDenseThreshold) {
        auto ev = dense_eigenvalues(h);
        e0 = *std::min_element(ev.begin(), ev.end());
    } else {
        e0 = lanczos_lowest(h);
    }
    return e0 / params.lattice.sites();
}

// Ground-state eigenvalue -2dt cos(pi/(l+1)) of the one-particle hopping
// matrix on an open l^d box.
inline double dirichlet_kinetic_min(int box_side, int dim, double t) {
    if (box_side < 1) throw std::invalid_argument("dirichlet_kinetic_min: box side must be >= 1");
    return -2.0 * dim * t * std::cos(M_PI / (box_side + 1));
}

// Independent check of the closed form above: lowest eigenvalue of the
// one-particle open-boundary hopping matrix on the l^d box.
inline double dirichlet_kinetic_min_numeric(int box_side, int dim, double t) {
    LatticeSpec box{dim, box_side, Boundary::open};
    box.validate();
    const int n = box.sites();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [a, b] : box.bonds()) {
        m(a, b) = -t;
        m(b, a) = -t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace bhm
