#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "bhm/polymer.hpp"

using namespace bhm;

namespace {

PolymerSystem uniform_system(std::size_t n, long double w, long double zeta_all) {
    std::vector<Polymer> ps;
    for (std::size_t i = 0; i < n; ++i) ps.push_back({"p" + std::to_string(i), PolyScalar(w), 0.2});
    auto sys = PolymerSystem::make(std::move(ps));
    for (auto& row : sys.zeta)
        for (auto& z : row) z = PolyScalar(zeta_all);
    return sys;
}

// graph-enumeration oracle for phi with identical polymers and zeta == 1:
// (1/n!) sum over connected graphs of (-1)^{#edges}
Rational phi_allpairs_graph_oracle(int n) {
    if (n == 1) return Rational(1);
    auto edges = edge_order(n);
    Rational sum(0);
    connected_graphs(n, [&](std::uint32_t mask) {
        int bits = __builtin_popcount(mask);
        sum += Rational(bits % 2 == 0 ? 1 : -1);
    });
    std::int64_t fact = 1;
    for (int k = 2; k <= n; ++k) fact *= k;
    return sum / Rational(fact);
}

}  // namespace

TEST_CASE("connected graph counts 1, 1, 4, 38, 728") {
    CHECK(count_connected_graphs(1) == 1);
    CHECK(count_connected_graphs(2) == 1);
    CHECK(count_connected_graphs(3) == 4);
    CHECK(count_connected_graphs(4) == 38);
    CHECK(count_connected_graphs(5) == 728);
    CHECK_THROWS(count_connected_graphs(0));
    CHECK_THROWS(count_connected_graphs(9));
}

TEST_CASE("phi on all-pairs hard core equals (-1)^{n-1}/n exactly") {
    for (int n = 1; n <= 6; ++n) {
        std::vector<std::vector<int>> z(n, std::vector<int>(n, 1));
        Rational expect(n % 2 == 1 ? 1 : -1, n);
        CHECK(phi_rational(z) == expect);
        if (n <= 6) CHECK(phi_allpairs_graph_oracle(n) == expect);
    }
}

TEST_CASE("phi base cases in floating point") {
    auto sys = uniform_system(4, 0.1L, 1.0L);
    CHECK(std::abs(phi(sys, {0}) - PolyScalar(1)) < 1e-18L);
    CHECK(std::abs(phi(sys, {0, 1}) - PolyScalar(-0.5L)) < 1e-18L);
    CHECK(std::abs(phi(sys, {0, 1, 2}) - PolyScalar(1.0L / 3)) < 1e-17L);
    CHECK(std::abs(phi(sys, {0, 1, 2, 3}) - PolyScalar(-0.25L)) < 1e-17L);
}

TEST_CASE("phi vanishes on disconnected sequences") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> ud(0.1, 0.9);
    for (int c = 0; c < 10; ++c) {
        // two blocks with random internal zeta, no cross coupling
        std::vector<Polymer> ps(5, Polymer{"p", PolyScalar(0.1L), 0.0});
        auto sys = PolymerSystem::make(std::move(ps));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j) {
                bool same_block = (i < 2) == (j < 2);
                long double z = same_block ? (long double)ud(rng) : 0.0L;
                sys.zeta[i][j] = sys.zeta[j][i] = PolyScalar(z);
            }
        CHECK(std::abs(phi(sys, {0, 1, 2, 3, 4})) < 1e-17L);
    }
}

TEST_CASE("phi is permutation invariant") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<Polymer> ps(4, Polymer{"p", PolyScalar(0.1L), 0.0});
    auto sys = PolymerSystem::make(std::move(ps));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j)
            sys.zeta[i][j] = sys.zeta[j][i] = PolyScalar((long double)ud(rng));
    std::vector<std::size_t> seq = {0, 1, 2, 3};
    auto base = phi(sys, seq);
    for (int c = 0; c < 10; ++c) {
        std::shuffle(seq.begin(), seq.end(), rng);
        CHECK(std::abs(phi(sys, seq) - base) < 1e-17L);
    }
}

TEST_CASE("partition function: empty set, self hard core, free gas") {
    PolymerSystem empty;
    CHECK(std::abs(partition_function(empty).value - PolyScalar(1)) < 1e-18L);

    auto one = uniform_system(1, 0.3L, 1.0L);  // zeta(A,A) = 1
    CHECK(std::abs(partition_function(one).value - PolyScalar(1.3L)) < 1e-18L);

    auto free_gas = uniform_system(1, 0.3L, 0.0L);
    auto rep = partition_function(free_gas, 30);
    CHECK(std::abs(rep.value - PolyScalar(std::exp(0.3L))) < 1e-15L);
}

TEST_CASE("single polymer cluster series reproduces log(1 + w)") {
    auto sys = uniform_system(1, 0.1L, 1.0L);
    auto rep = log_partition_clusters(sys, 6);
    CHECK(std::abs(rep.value - PolyScalar(std::log(1.1L))) < 1e-7L);
    CHECK(!rep.diverging);
    // alternating magnitudes w^n/n
    CHECK(rep.order_magnitude[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rep.order_magnitude[2] == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("zeta == 0 truncates the cluster series at order one") {
    auto sys = uniform_system(3, 0.2L, 0.0L);
    auto rep = log_partition_clusters(sys, 5);
    CHECK(std::abs(rep.value - PolyScalar(0.6L)) < 1e-18L);
    for (int n = 2; n <= 5; ++n) CHECK(rep.order_magnitude[n] == 0.0L);
}

TEST_CASE("two-polymer cluster series matches direct log Z") {
    auto sys = uniform_system(2, 0.05L, 1.0L);
    auto z = partition_function(sys);
    auto lg = log_partition_clusters(sys, 8);
    CHECK(std::abs(std::exp(lg.value) - z.value) < 1e-6L);
}

TEST_CASE("exp(cluster series) converges to Z with growing order") {
    // 1D hard rods of length 2 on 10 cells
    std::vector<Polymer> ps;
    for (int i = 0; i < 9; ++i) ps.push_back({"rod" + std::to_string(i), PolyScalar(0.05L), 0.2});
    auto sys = PolymerSystem::make(std::move(ps));
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j)
            if (std::abs(i - j) <= 1) sys.zeta[i][j] = PolyScalar(1);
    REQUIRE(kp_check(sys).satisfied);
    auto z = partition_function(sys, 9);  // exact: self hard core kills repeats
    long double prev = 1e30L;
    for (int K : {3, 5, 7}) {
        auto lg = log_partition_clusters(sys, K);
        long double err = std::abs(std::exp(lg.value) - z.value);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-6L);
}

TEST_CASE("kp_check worked examples") {
    auto good = uniform_system(1, 0.1L, 1.0L);
    auto r1 = kp_check(good);
    CHECK(r1.satisfied);
    CHECK(r1.slack == doctest::Approx(0.2 - 0.1 * std::exp(0.2)).epsilon(1e-12));

    auto free_gas = uniform_system(3, 0.5L, 0.0L);
    for (auto& p : free_gas.polymers) p.kp_weight = 0.0;
    CHECK(kp_check(free_gas).satisfied);

    auto bad = uniform_system(1, 0.5L, 1.0L);
    CHECK(!kp_check(bad).satisfied);
}

TEST_CASE("cluster bound holds when the criterion does") {
    auto free_gas = uniform_system(2, 0.3L, 0.0L);
    auto r = cluster_bound_check(free_gas, 0, 6);
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.satisfied);

    auto one = uniform_system(1, 0.1L, 1.0L);
    auto r1 = cluster_bound_check(one, 0, 8);
    CHECK(r1.satisfied);
    CHECK(r1.lhs <= std::exp(0.2L));

    auto two = uniform_system(2, 0.05L, 1.0L);
    CHECK(cluster_bound_check(two, 0, 8).satisfied);
}

TEST_CASE("json round trip") {
    auto sys = uniform_system(3, 0.07L, 0.0L);
    sys.zeta[0][1] = sys.zeta[1][0] = PolyScalar(1);
    sys.zeta[2][2] = PolyScalar(0.5L, 0.25L);
    sys.polymers[1].weight = PolyScalar(0.01L, -0.02L);
    auto j = to_json(sys);
    auto back = polymer_system_from_json(j);
    REQUIRE(back.size() == sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) {
        CHECK(std::abs(back.polymers[i].weight - sys.polymers[i].weight) < 1e-15L);
        CHECK(back.polymers[i].kp_weight == doctest::Approx(sys.polymers[i].kp_weight));
        for (std::size_t k = 0; k < sys.size(); ++k)
            CHECK(std::abs(back.zeta[i][k] - sys.zeta[i][k]) < 1e-15L);
    }
}

TEST_CASE("zeta validation rejects |1 - zeta| > 1") {
    auto sys = uniform_system(2, 0.1L, 2.5L);
    CHECK_THROWS(sys.validate());
}
