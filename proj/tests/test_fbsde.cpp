#include "mfglab/fbsde.hpp"
#include "mfglab/oracles.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mfglab;
using namespace mfglab::testing;

namespace {

NoiseBank bank(const Model& m, long paths, std::uint64_t seed = 42) {
    return NoiseBank::generate(seed, paths, m.K(), m.dt());
}

double sample_var(const PathArray& x, int k) {
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < x.paths(); ++i) {
        s += x(k, i, 0);
        s2 += x(k, i, 0) * x(k, i, 0);
    }
    const double n = static_cast<double>(x.paths());
    return (s2 - s * s / n) / (n - 1);
}

} // namespace

TEST_CASE("forward simulation trivial cases") {
    Scalar s;
    s.B = 0;
    s.x0 = 0.7;
    {
        const Model m = s.model();
        const PathEnsemble e = simulate_forward(m, MeanPath(m.K() + 1, 1), PathArray(m.K(), 50, 1), bank(m, 50));
        for (int k = 0; k <= m.K(); ++k)
            for (long i = 0; i < 50; ++i) CHECK(e.x(k, i, 0) == 0.7);
    }
    s.b = 1.0;
    {
        const Model m = s.model();
        const PathEnsemble e = simulate_forward(m, MeanPath(m.K() + 1, 1), PathArray(m.K(), 5, 1), bank(m, 5));
        CHECK(std::abs(e.x(m.K(), 3, 0) - 1.7) <= 1e-13);
    }
    s.b = 0.0;
    s.sigma = 1.0;
    const Model m = s.model();
    const long M = 20000;
    const PathEnsemble e = simulate_forward(m, MeanPath(m.K() + 1, 1), PathArray(m.K(), M, 1), bank(m, M));
    CHECK(std::abs(sample_var(e.x, m.K()) - 1.0) <= 3.0 * std::sqrt(2.0 / M));
}

TEST_CASE("feedback and explicit forward simulation agree") {
    Scalar s;
    s.sigma = 0.3;
    s.D = 0.2;
    s.K = 20;
    const Model m = s.model();
    const NoiseBank nb = bank(m, 100);
    const MeanPath z(m.K() + 1, 1, 0.5);
    const FeedbackPolicy pol = [](int, const double* x, double* u) { u[0] = -0.5 * x[0]; };
    const PathEnsemble fb = simulate_forward(m, z, pol, nb);
    const PathEnsemble ex = simulate_forward(m, z, fb.u, nb);
    CHECK(fb.x == ex.x);
}

TEST_CASE("backward pass trivial cases") {
    Scalar s;
    s.Q = 0;
    s.G = 0;
    s.sigma = 0.4;
    s.K = 20;
    {
        const Model m = s.model();
        const NoiseBank nb = bank(m, 500);
        const MeanPath z(m.K() + 1, 1);
        const PathEnsemble e = simulate_forward(m, z, PathArray(m.K(), 500, 1), nb);
        const BackwardSolution b = backward_pass(m, z, e, nb, 3);
        for (double v : b.p.raw()) CHECK(v == 0.0);
        for (double v : b.q.raw()) CHECK(v == 0.0);
    }
    s.G = 1;
    s.sigma = 0;
    s.x0 = 0.3;
    const Model m = s.model();
    const NoiseBank nb = bank(m, 64);
    const MeanPath z(m.K() + 1, 1, -0.2);
    const PathEnsemble e = simulate_forward(m, z, PathArray(m.K(), 64, 1), nb);
    const BackwardSolution b = backward_pass(m, z, e, nb, 3);
    for (int k = 0; k <= m.K(); ++k) CHECK(std::abs(b.p(k, 7, 0) + 0.5) <= 1e-9);
    for (double v : b.q.raw()) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("picard degenerate cases") {
    Scalar s;
    s.Q = 0;
    s.G = 0;
    s.sigma = 0.5;
    s.K = 20;
    s.gamma = ConvexSet::interval(1, 2);
    PicardConfig cfg;
    cfg.paths = 400;
    {
        const Model m = s.model();
        const FBSDESolution sol = picard_solve_frozen(m, MeanPath(m.K() + 1, 1), cfg, bank(m, 400));
        CHECK(sol.converged);
        CHECK(sol.iterations() == 1);
        for (double v : sol.ensemble.u.raw()) CHECK(v == 1.0);
    }
    s.Q = 1;
    s.G = 1;
    s.gamma = ConvexSet::singleton(Vec::Constant(1, -0.25));
    const Model m = s.model();
    const FBSDESolution sol = picard_solve_frozen(m, MeanPath(m.K() + 1, 1), cfg, bank(m, 400));
    CHECK(sol.converged);
    for (double v : sol.ensemble.u.raw()) CHECK(v == -0.25);
}

TEST_CASE("picard invariants") {
    Scalar s;
    s.sigma = 0.5;
    s.F = 0.5;
    s.D = 0.3;
    s.G = 0.8;
    s.K = 30;
    s.gamma = ConvexSet::interval(-0.2, 0.4);
    const Model m = s.model();
    PicardConfig cfg;
    cfg.paths = 2000;
    const NoiseBank nb = bank(m, cfg.paths);
    MeanPath z(m.K() + 1, 1);
    for (int k = 0; k <= m.K(); ++k) z(k, 0) = 1.0 - 0.3 * m.grid().t(k);
    const FBSDESolution a = picard_solve_frozen(m, z, cfg, nb);
    const FBSDESolution b = picard_solve_frozen(m, z, cfg, nb);
    CHECK(a.converged);
    CHECK(a.ensemble.x == b.ensemble.x);
    CHECK(a.ensemble.u == b.ensemble.u);
    CHECK(a.backward.p == b.backward.p);
    CHECK(a.backward.q == b.backward.q);
    CHECK(a.log == b.log);
    for (long i = 0; i < cfg.paths; ++i) {
        CHECK(a.backward.p(m.K(), i, 0) + 0.8 * (a.ensemble.x(m.K(), i, 0) - z(m.K(), 0)) == 0.0);
    }
    for (double v : a.ensemble.u.raw()) CHECK(m.gamma().contains(Vec::Constant(1, v), 1e-9));
    CHECK(monotonicity_diagnostic(m, a, a) == 0.0);

    // A second start from a random feasible control reaches the same control.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.2, 0.4);
    PathArray init(m.K(), cfg.paths, 1);
    for (double& v : init.raw()) v = u(rng);
    const FBSDESolution c = picard_solve_frozen(m, z, cfg, nb, &init);
    CHECK(c.converged);
    CHECK(control_l2_distance(a.ensemble.u, c.ensemble.u, m.dt()) <= 2.0 * cfg.tol_u);
    double scale = 0.0;
    for (double v : a.ensemble.u.raw()) scale += v * v;
    scale = scale * m.dt() / static_cast<double>(cfg.paths);
    CHECK(monotonicity_diagnostic(m, a, c) >= -1e-3 * scale);
}

TEST_CASE("projection pairs are monotone pathwise") {
    std::mt19937_64 rng(21);
    for (int kind = 0; kind < 6; ++kind) {
        const ConvexSet set = random_set(rng, kind, 2);
        const WeightMatrix w = random_weight(rng, 2, false);
        for (int t = 0; t < 200; ++t) {
            const Vec a = random_vec(rng, 2, 2.0), b = random_vec(rng, 2, 2.0);
            const Vec pa = project_weighted(set, a, w), pb = project_weighted(set, b, w);
            CHECK((pa - pb).dot(w.matrix() * (a - b)) >= -1e-10);
        }
    }
}

TEST_CASE("adjoint fit matches the riccati adjoint") {
    Scalar s;
    s.F = 0.5;
    s.sigma = 0.5;
    const Model m = s.model();
    const MeanPath z = riccati_mean_fixed_point(m);
    PicardConfig cfg;
    cfg.paths = 20000;
    const FBSDESolution sol = picard_solve_frozen(m, z, cfg, bank(m, cfg.paths, 3));
    REQUIRE(sol.converged);
    const RiccatiSolution r = solve_riccati(m, z);
    double mae = 0.0, scale = 0.0;
    for (int k = 0; k <= m.K(); ++k) {
        for (long i = 0; i < cfg.paths; ++i) {
            const double p = r.adjoint_p(k, Vec::Constant(1, sol.ensemble.x(k, i, 0)))[0];
            mae += std::abs(sol.backward.p(k, i, 0) - p);
            scale += std::abs(p);
        }
    }
    const double count = static_cast<double>((m.K() + 1) * cfg.paths);
    CHECK(mae / count <= 2e-2 * (1.0 + scale / count));
}

TEST_CASE("time step refinement changes the cost at first order") {
    // Deterministic tanh instance at frozen z = 0: no Monte Carlo noise.
    double J[3];
    for (int r = 0; r < 3; ++r) {
        Scalar s;
        s.K = 50 << r;
        const Model m = s.model();
        PicardConfig cfg;
        cfg.paths = 8;
        cfg.tol_u = 1e-12;
        cfg.max_iter = 500;
        const MeanPath z(m.K() + 1, 1);
        const FBSDESolution sol = picard_solve_frozen(m, z, cfg, bank(m, cfg.paths));
        REQUIRE(sol.converged);
        J[r] = limit_cost(m, z, sol.ensemble.x, sol.ensemble.u);
    }
    const double ratio = (J[2] - J[1]) / (J[1] - J[0]);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
}

TEST_CASE("noise on another grid is rejected") {
    const Model m = Scalar{}.model();
    PicardConfig cfg;
    cfg.paths = 100;
    const NoiseBank wrong = NoiseBank::generate(1, 100, m.K() / 2, 2 * m.dt());
    CHECK_THROWS_AS(picard_solve_frozen(m, MeanPath(m.K() + 1, 1), cfg, wrong), ShapeMismatch);
}

TEST_CASE("noise coarsening sums increments") {
    const NoiseBank fine = NoiseBank::generate(5, 10, 8, 0.125);
    const NoiseBank coarse = fine.coarsen(2);
    CHECK(coarse.steps() == 4);
    CHECK(coarse.dw(1, 3) == doctest::Approx(fine.dw(2, 3) + fine.dw(3, 3)));
    const NoiseBank again = NoiseBank::generate(5, 10, 8, 0.125);
    CHECK(again.increments() == fine.increments());
}

TEST_CASE("backward pass needs the ensemble's own noise") {
    Scalar s;
    s.sigma = 0.3;
    s.K = 10;
    const Model m = s.model();
    const MeanPath z(m.K() + 1, 1);
    const PathEnsemble e = simulate_forward(m, z, PathArray(m.K(), 50, 1), bank(m, 50, 1));
    CHECK_THROWS_AS(backward_pass(m, z, e, bank(m, 50, 2), 2), MismatchedNoise);
}
