#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bhm/fock.hpp"
#include "bhm/trajectory.hpp"
#include "quad_oracle.hpp"

using namespace bhm;

namespace {

ModelParams ring_params(int L, double t, double U, double mu, double beta) {
    ModelParams p;
    p.lattice = {1, L, Boundary::periodic};
    p.t = t;
    p.U = U;
    p.mu = mu;
    p.beta = beta;
    p.n_max = 2;
    return p;
}

Eigen::MatrixXd adjacency_matrix(const std::vector<std::vector<int>>& nbr) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nbr.size(), nbr.size());
    for (std::size_t i = 0; i < nbr.size(); ++i)
        for (int j : nbr[i]) A(i, j) += 1.0;
    return A;
}

}  // namespace

TEST_CASE("closed-walk enumeration: base cases") {
    auto ball = BallGraph::make(1, 1);
    CHECK(count_closed_walks(ball.nbr, ball.origin, 0) == 1);  // stationary
    CHECK(count_closed_walks(ball.nbr, ball.origin, 1) == 0);
    CHECK(count_closed_walks(ball.nbr, ball.origin, 2) == 2);  // left/right return
}

TEST_CASE("closed-walk counts match adjacency powers") {
    for (int d : {1, 2}) {
        auto ball = BallGraph::make(d, 2);
        auto A = adjacency_matrix(ball.nbr);
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(A.rows(), A.cols());
        for (int m = 0; m <= 4; ++m) {
            CHECK(count_closed_walks(ball.nbr, ball.origin, m) ==
                  (long long)std::llround(P(ball.origin, ball.origin)));
            P = P * A;
        }
    }
}

TEST_CASE("lattice adjacency counts walks on the periodic ring") {
    LatticeSpec ring{1, 4, Boundary::periodic};
    auto nbr = lattice_adjacency(ring);
    CHECK(count_closed_walks(nbr, 0, 2) == 2);
    CHECK(count_closed_walks(nbr, 0, 4) == 8);  // two of them wrap the ring
}

TEST_CASE("single-wrap trajectory weights are exact") {
    auto p = ring_params(4, 0.3, 1.0, -0.4, 2.0);
    TrajectorySkeleton stat{{0}, 1};
    CHECK(trajectory_weight(stat, p).value == doctest::Approx(std::exp(-0.8)).epsilon(1e-14));

    TrajectorySkeleton ret{{0, 1, 0}, 1};
    double expect = std::exp(-0.8) * 0.09 * 4.0 / 2.0;  // e^{beta mu} t^2 beta^2/2
    CHECK(trajectory_weight(ret, p).value == doctest::Approx(expect).epsilon(1e-14));

    // integrated weight never exceeds the free simplex volume bound
    auto nbr = lattice_adjacency(p.lattice);
    for (int m : {0, 2, 4})
        enumerate_trajectories(nbr, 0, 1, m, [&](const TrajectorySkeleton& th) {
            double cap = std::exp(p.beta * p.mu) * std::pow(p.t * p.beta, m);
            for (int k = 2; k <= m; ++k) cap /= k;
            CHECK(trajectory_weight(th, p).value <= cap * (1 + 1e-12));
        });
}

TEST_CASE("self-intersection time of a stationary double wrap") {
    TrajectorySkeleton th{{0}, 2};
    CHECK(self_intersection_W(th, {}, 1.5) == doctest::Approx(1.5));
    TrajectorySkeleton triple{{0}, 3};
    CHECK(self_intersection_W(triple, {}, 1.5) == doctest::Approx(3 * 1.5));  // 3 wrap pairs

    auto p = ring_params(4, 0.2, 0.7, -0.5, 1.5);
    double expect = 0.5 * std::exp(2 * 1.5 * -0.5) * std::exp(-0.7 * 1.5);
    CHECK(trajectory_weight(th, p).value == doctest::Approx(expect).epsilon(1e-14));

    p.U = 0.0;
    p.u_infinite = true;
    p.n_max = 1;
    CHECK(trajectory_weight(th, p).value == 0.0);  // wraps always co-occupy
}

TEST_CASE("pair overlap and interaction") {
    double beta = 2.0;
    TrajectorySkeleton a{{0}, 1}, b{{0}, 1}, c{{2}, 1};
    CHECK(pair_overlap_W(a, {}, b, {}, beta) == doctest::Approx(beta));
    CHECK(pair_overlap_W(a, {}, c, {}, beta) == 0.0);

    auto p = ring_params(4, 0.1, 0.9, -0.3, beta);
    CHECK(zeta_between(a, b, p) == doctest::Approx(1 - std::exp(-0.9 * beta)).epsilon(1e-14));
    CHECK(zeta_between(a, c, p) == 0.0);
    p.u_infinite = true;
    p.U = 0.0;
    p.n_max = 1;
    CHECK(zeta_between(a, b, p) == 1.0);
}

TEST_CASE("double-wrap grid integral against quadrature with hand-derived overlap") {
    // two-site excursion over two wraps: W is a known piecewise-linear form
    auto p = ring_params(4, 0.25, 1.3, -0.6, 1.0);
    double beta = p.beta, U = p.U;
    TrajectorySkeleton th{{0, 1, 0}, 2};

    auto f = [&](double t1, double t2) {
        double W;
        if (t2 <= beta)
            W = beta - (t2 - t1);
        else if (t1 >= beta)
            W = beta - (t2 - t1);
        else
            W = std::abs(t1 - (t2 - beta));
        return std::exp(-U * W);
    };
    // ordered integral over 0 < t1 < t2 < 2 beta via nested Gauss-Legendre
    oracle::GaussLegendre gl(48);
    double T = 2 * beta, ref = 0;
    for (int i = 0; i < 48; ++i) {
        double t1 = 0.5 * T * (gl.x[i] + 1), w1 = 0.5 * T * gl.w[i];
        double inner = 0;
        for (int k = 0; k < 48; ++k) {
            double span = T - t1;
            double t2 = t1 + 0.5 * span * (gl.x[k] + 1);
            inner += 0.5 * span * gl.w[k] * f(t1, t2);
        }
        ref += w1 * inner;
    }
    double expect = std::exp(2 * beta * p.mu) / 2 * p.t * p.t * ref;

    auto got = trajectory_weight(th, p);
    CHECK(std::abs(got.value - expect) < std::max(5e-4 * expect, 10 * got.grid_error + 1e-8));
}

TEST_CASE("dilute convergence weights") {
    auto kp = kp_trajectory_params(0.1, -0.5, 1);
    CHECK(kp.feasible);
    CHECK(kp.s == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(kp.a == doctest::Approx(std::log(1.5)).epsilon(1e-14));
    CHECK(kp.b == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(kp.margin == doctest::Approx(-0.1).epsilon(1e-12));

    CHECK(!kp_trajectory_params(0.1, -0.2, 1).feasible);  // mu + 2dt = 0
    CHECK(!kp_trajectory_params(0.1, 0.3, 2).feasible);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> td(0.01, 0.5);
    for (int k = 0; k < 25; ++k) {
        double t = td(rng);
        int d = 1 + k % 3;
        std::uniform_real_distribution<double> mud(-3.0, -2.0 * d * t - 1e-3);
        auto r = kp_trajectory_params(t, mud(rng), d);
        REQUIRE(r.feasible);
        CHECK(r.margin < 0);
        CHECK(r.margin == doctest::Approx(-r.s / 3).epsilon(1e-10));
    }
}

TEST_CASE("t = 0 trajectory expansion recovers the single-site gas") {
    auto p = ring_params(4, 0.0, 1.0, -0.3, 3.0);
    auto rep = truncated_pressure_trajectories(p, 0, 6, 6);
    // uncapped single-site partition function, higher occupancies negligible
    double z1 = 0;
    for (int n = 0; n <= 8; ++n)
        z1 += std::exp(p.beta * (p.mu * n - 0.5 * p.U * n * (n - 1)));
    double expect = std::log(z1);
    CHECK(std::abs(rep.pressure - expect) < 1e-10 + rep.truncation_bound);
    CHECK(std::abs(rep.pressure - expect) < 2e-4);
}

TEST_CASE("dilute-regime expansion matches exact diagonalization within its own bound") {
    auto p = ring_params(4, 0.05, 1.0, -0.2, 20.0);
    auto rep = truncated_pressure_trajectories(p, 4, 2, 3);
    CHECK(rep.kp_params_feasible);
    CHECK(rep.kp.satisfied);
    CHECK(!rep.series.diverging);

    double p_ed = pressure_ed(p);
    CHECK(std::abs(rep.pressure - p_ed) < rep.truncation_bound);
    CHECK(rep.truncation_bound < 0.2);  // conservative but still informative
}
