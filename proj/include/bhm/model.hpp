#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhm {

enum class Boundary { periodic, open };

// Finite cube Lambda = {0,...,L-1}^d with either periodic or open edges.
struct LatticeSpec {
    int dim = 1;
    int extent = 1;
    Boundary boundary = Boundary::periodic;

    int sites() const {
        int n = 1;
        for (int k = 0; k < dim; ++k) n *= extent;
        return n;
    }

    std::vector<int> coords(int site) const {
        std::vector<int> c(dim);
        for (int k = 0; k < dim; ++k) { c[k] = site % extent; site /= extent; }
        return c;
    }

    int site_of(const std::vector<int>& c) const {
        int s = 0;
        for (int k = dim - 1; k >= 0; --k) s = s * extent + c[k];
        return s;
    }

    // Each undirected lattice bond appears exactly once. For periodic L=2 in
    // one axis the ring has a double bond, which is kept (two edges between
    // the same pair of sites).
    std::vector<std::pair<int, int>> bonds() const {
        std::vector<std::pair<int, int>> out;
        const int n = sites();
        for (int s = 0; s < n; ++s) {
            auto c = coords(s);
            for (int k = 0; k < dim; ++k) {
                if (c[k] + 1 < extent) {
                    auto c2 = c; c2[k] += 1;
                    out.emplace_back(s, site_of(c2));
                } else if (boundary == Boundary::periodic && extent > 1) {
                    auto c2 = c; c2[k] = 0;
                    out.emplace_back(s, site_of(c2));
                }
            }
        }
        return out;
    }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("lattice: dimension must be >= 1");
        if (extent < 1) throw std::invalid_argument("lattice: extent must be >= 1");
    }
};

// Lattice boson parameters with an occupation cap. The hard-core limit is
// represented by the cap n_max = 1 (u_infinite set), never by a large float.
struct ModelParams {
    LatticeSpec lattice;
    double t = 0.0;       // hopping, > 0 (t = 0 accepted as a degenerate limit in tests)
    double U = 0.0;       // on-site repulsion, >= 0, ignored when u_infinite
    bool u_infinite = false;
    double mu = 0.0;      // chemical potential
    double beta = 1.0;    // inverse temperature, > 0
    int n_max = 1;        // occupation cap per site

    void validate() const {
        lattice.validate();
        if (t < 0) throw std::invalid_argument("params: t must be positive");
        if (beta <= 0) throw std::invalid_argument("params: beta must be positive");
        if (n_max < 1) throw std::invalid_argument("params: n_max must be >= 1");
        if (u_infinite && n_max != 1)
            throw std::invalid_argument("params: hard core requires n_max = 1");
        if (!u_infinite && U < 0)
            throw std::invalid_argument("params: U must be >= 0");
    }

    // On-site energy of occupation n relative to the grand potential,
    // U/2 n(n-1) - mu n. With the hard-core cap, n is 0 or 1 and the U term
    // never fires.
    double onsite_energy(int n) const {
        double rep = u_infinite ? 0.0 : 0.5 * U * n * (n - 1);
        return rep - mu * n;
    }
};

}  // namespace bhm
