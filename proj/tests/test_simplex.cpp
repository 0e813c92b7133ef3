#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bhm/simplex.hpp"
#include "quad_oracle.hpp"

using bhm::simplex_exp_integral;

TEST_CASE("no jumps: plain exponential") {
    CHECK(simplex_exp_integral({1.3}, 2.0) == doctest::Approx(std::exp(-2.6)).epsilon(1e-14));
}

TEST_CASE("zero energies: simplex volume") {
    double beta = 1.7;
    CHECK(simplex_exp_integral({0, 0, 0}, beta) ==
          doctest::Approx(beta * beta / 2).epsilon(1e-13));
}

TEST_CASE("one jump: two-exponential closed form and confluent limit") {
    double e1 = 0.8, e2 = -0.3, beta = 1.2;
    double exact = (std::exp(-e2 * beta) - std::exp(-e1 * beta)) / (e1 - e2);
    CHECK(simplex_exp_integral({e1, e2}, beta) == doctest::Approx(exact).epsilon(1e-12));
    // E1 -> E2 limit is beta e^{-E beta}
    CHECK(simplex_exp_integral({0.5, 0.5 + 1e-13}, beta) ==
          doctest::Approx(beta * std::exp(-0.5 * beta)).epsilon(1e-10));
}

TEST_CASE("constant energies: beta^m e^{-E beta} / m!") {
    double e = 0.6, beta = 2.0;
    for (int m = 1; m <= 5; ++m) {
        std::vector<double> en(m + 1, e);
        double fact = 1;
        for (int k = 2; k <= m; ++k) fact *= k;
        CHECK(simplex_exp_integral(en, beta) ==
              doctest::Approx(std::pow(beta, m) * std::exp(-e * beta) / fact).epsilon(1e-12));
    }
}

TEST_CASE("symmetric under reversing the energy sequence") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ud(-2, 2);
    for (int c = 0; c < 20; ++c) {
        int m = 1 + c % 4;
        std::vector<double> en(m + 1);
        for (auto& e : en) e = ud(rng);
        auto rev = en;
        std::reverse(rev.begin(), rev.end());
        double a = simplex_exp_integral(en, 1.3), b = simplex_exp_integral(rev, 1.3);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("matches adaptive quadrature on random energies") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ud(-3, 3);
    for (int c = 0; c < 25; ++c) {
        int m = 1 + c % 4;
        std::vector<double> en(m + 1);
        for (auto& e : en) e = ud(rng);
        double ref = oracle::simplex_integral_quadrature(en, 1.0);
        CHECK(simplex_exp_integral(en, 1.0) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("near-degenerate energies against quadrature") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ud(-2, 2);
    for (int c = 0; c < 10; ++c) {
        int m = 2 + c % 3;
        std::vector<double> en(m + 1);
        double base = ud(rng);
        for (auto& e : en) e = base + 1e-10 * ud(rng);
        en[0] = ud(rng);  // one separated energy, rest nearly equal
        double ref = oracle::simplex_integral_quadrature(en, 1.0);
        CHECK(simplex_exp_integral(en, 1.0) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS(simplex_exp_integral({}, 1.0));
    CHECK_THROWS(simplex_exp_integral({1.0}, -1.0));
}
