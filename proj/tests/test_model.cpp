#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mfglab;
using namespace mfglab::testing;

TEST_CASE("validate examples") {
    CHECK(validate(Scalar{}.spec()).ok());

    ModelSpec s = Scalar{}.spec();
    s.coeffs.R[7] = Mat::Zero(1, 1);
    const ValidationReport r = validate(s);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].assumption == "H2");
    CHECK(r.violations[0].node == 7);
    CHECK(r.to_string().find("(H2)") != std::string::npos);
    CHECK_THROWS_AS(Model{s}, ValidationFailed);

    ModelSpec p;
    p.n = 2;
    p.m = 1;
    p.x0 = Vec::Zero(2);
    p.grid = {1.0, 10};
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    p.coeffs = Coefficients::constant(10, a, Mat::Zero(2, 2), Mat::Ones(2, 1), Mat::Zero(2, 1), Vec::Zero(2),
                                      Vec::Zero(2), Mat::Identity(2, 2), Mat::Identity(1, 1), Mat::Zero(2, 2));
    p.gamma = ConvexSet::full(1);
    const ValidationReport strict = validate(p, true);
    REQUIRE(!strict.ok());
    CHECK(strict.violations[0].assumption == "H1");
    CHECK(validate(p, false).ok());
}

TEST_CASE("validate catches shapes and definiteness") {
    ModelSpec s = Scalar{}.spec();
    s.coeffs.Q[3] = Mat::Constant(1, 1, -1.0);
    CHECK(!validate(s).ok());
    s = Scalar{}.spec();
    s.coeffs.G = Mat::Constant(1, 1, -0.5);
    CHECK(!validate(s).ok());
    s = Scalar{}.spec();
    s.coeffs.A[2] = Mat::Constant(1, 1, INFINITY);
    CHECK(!validate(s).ok());
    s = Scalar{}.spec();
    s.coeffs.B.pop_back();
    CHECK(validate(s).violations.at(0).assumption == "shape");
}

TEST_CASE("control map examples") {
    Scalar sc;
    sc.B = 1;
    sc.D = 1;
    sc.R = 2;
    {
        const Model m = sc.model();
        CHECK(m.control_map(0, Vec::Constant(1, 3), Vec::Constant(1, 1))[0] == doctest::Approx(2.0));
    }
    sc.gamma = ConvexSet::interval(0, 1);
    CHECK(sc.model().control_map(0, Vec::Constant(1, 3), Vec::Constant(1, 1))[0] == 1.0);
    sc.gamma = ConvexSet::interval(1, 2);
    CHECK(sc.model().control_map(0, Vec::Zero(1), Vec::Zero(1))[0] == 1.0);
}

namespace {

ModelSpec planar(const ConvexSet& gamma) {
    ModelSpec p;
    p.n = 2;
    p.m = 2;
    p.x0 = Vec::Zero(2);
    p.grid = {1.0, 4};
    Mat b(2, 2), d(2, 2), r(2, 2), a(2, 2);
    b << 1, 0.5, -0.2, 1;
    d << 0.3, 0, 0.1, 0.2;
    r << 2, 0.4, 0.4, 1;
    a << 0.1, 0.2, 0.2, -0.3;
    p.coeffs = Coefficients::constant(4, a, 0.5 * Mat::Identity(2, 2), b, d, Vec::Constant(2, 0.1), Vec::Constant(2, 0.2),
                                      Mat::Identity(2, 2), r, Mat::Identity(2, 2));
    p.gamma = gamma;
    return p;
}

} // namespace

TEST_CASE("control map properties") {
    std::mt19937_64 rng(11);
    Vec c(2);
    c << 0.2, -0.1;
    const Model full(planar(ConvexSet::full(2)));
    for (int t = 0; t < 50; ++t) {
        const Vec p = random_vec(rng, 2, 2.0), q = random_vec(rng, 2, 2.0);
        const Vec u = full.control_map(1, p, q);
        const auto& co = full.coeffs();
        CHECK((co.R[1] * u - (co.B[1].transpose() * p + co.D[1].transpose() * q)).norm() <= 1e-10);
    }
    for (int kind = 1; kind < 6; ++kind) {
        const Model model(planar(random_set(rng, kind, 2)));
        const auto& co = model.coeffs();
        for (int t = 0; t < 50; ++t) {
            const Vec p = random_vec(rng, 2, 2.0), q = random_vec(rng, 2, 2.0);
            const Vec u = model.control_map(2, p, q);
            CHECK(model.gamma().contains(u, 1e-9));
            const Vec g = co.B[2].transpose() * p + co.D[2].transpose() * q - co.R[2] * u;
            for (int j = 0; j < 20; ++j) {
                const Vec v = model.gamma().project(random_vec(rng, 2, 2.0));
                CHECK(g.dot(v - u) <= 1e-9);
            }
        }
    }
}

TEST_CASE("hamiltonian examples and maximization") {
    Scalar sc;
    sc.B = 0;
    sc.Q = 0;
    sc.R = 1;
    {
        const Model m = sc.model();
        CHECK(hamiltonian(m, 0, Vec::Zero(1), Vec::Zero(1), Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)) == 0.0);
    }
    sc.b = 2;
    {
        const Model m = sc.model();
        CHECK(hamiltonian(m, 0, Vec::Ones(1), Vec::Zero(1), Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)) == 2.0);
    }
    Scalar c;
    c.B = 1.3;
    c.D = 0.4;
    c.R = 0.7;
    c.gamma = ConvexSet::interval(-0.5, 0.8);
    const Model m = c.model();
    std::mt19937_64 rng(2);
    for (int t = 0; t < 30; ++t) {
        const Vec p = random_vec(rng, 1, 2.0), q = random_vec(rng, 1, 2.0), x = random_vec(rng, 1, 1.0);
        const Vec z = random_vec(rng, 1, 1.0);
        const Vec us = m.control_map(0, p, q);
        const double hs = hamiltonian(m, 0, p, q, x, us, z);
        for (int g = 0; g <= 1000; ++g) {
            const Vec u = Vec::Constant(1, -0.5 + 1.3 * g / 1000.0);
            CHECK(hs >= hamiltonian(m, 0, p, q, x, u, z) - 1e-9);
        }
        // Strict concavity in u: second difference <= -r_min |du|^2.
        const Vec u0 = Vec::Constant(1, 0.1), du = Vec::Constant(1, 0.05);
        const double second = hamiltonian(m, 0, p, q, x, u0 + du, z) - 2 * hamiltonian(m, 0, p, q, x, u0, z) +
                              hamiltonian(m, 0, p, q, x, u0 - du, z);
        CHECK(second <= -m.spec().r_min * du.squaredNorm() * (1 - 1e-6));
    }
    CHECK_THROWS_AS(hamiltonian(m, 0, Vec::Zero(1), Vec::Zero(1), Vec::Zero(1), Vec::Constant(1, 3.0), Vec::Zero(1)),
                    ControlNotFeasible);
}

TEST_CASE("limit cost examples") {
    Scalar sc;
    sc.K = 1000;
    const Model m = sc.model();
    PathArray x(1001, 1, 1), u(1000, 1, 1);
    const MeanPath z(1001, 1);
    CHECK(limit_cost(m, z, x, u) == 0.0);

    for (int k = 0; k <= 1000; ++k) x(k, 0, 0) = m.grid().t(k);
    CHECK(std::abs(limit_cost(m, z, x, u) - 1.0 / 6.0) <= 1e-3);

    Scalar c;
    c.Q = 0;
    c.G = 0;
    c.R = 3;
    c.K = 10;
    c.T = 2;
    const Model mc = c.model();
    PathArray x2(11, 2, 1), u2(10, 2, 1, 0.25);
    CHECK(limit_cost(mc, MeanPath(11, 1), x2, u2) == doctest::Approx(0.5 * 2 * 0.25 * 3 * 0.25).epsilon(1e-14));
}

TEST_CASE("coupled cost examples") {
    Scalar sc;
    sc.K = 200;
    const Model m = sc.model();
    // Two deterministic agents at 1 and 0; the average is 1/2.
    PathArray x(201, 2, 1), u(200, 2, 1);
    PathArray avg(201, 1, 1, 0.5);
    for (int k = 0; k <= 200; ++k) x(k, 0, 0) = 1.0;
    const auto cost = tracking_cost_per_path(m, x, avg, u);
    CHECK(cost[0] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    CHECK(cost[1] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

    // N = 1: own state is the average, only the control term survives.
    PathArray x1(201, 1, 1), u1(200, 1, 1, 0.5);
    for (int k = 0; k <= 200; ++k) x1(k, 0, 0) = std::sin(k * 0.1);
    const auto single = tracking_cost_per_path(m, x1, x1, u1);
    CHECK(single[0] == doctest::Approx(0.5 * 0.25).epsilon(1e-12));
    for (double v : tracking_cost_per_path(m, x, x, u)) CHECK(v >= 0.0);
}

TEST_CASE("time-varying coefficients are piecewise constant on the grid") {
    ModelSpec s = Scalar{}.spec();
    for (int k = 0; k <= s.grid.K; ++k) s.coeffs.R[k] = Mat::Constant(1, 1, 1.0 + k);
    const Model m(s);
    CHECK(m.control_map(0, Vec::Ones(1), Vec::Zero(1))[0] == 1.0);
    CHECK(m.control_map(3, Vec::Ones(1), Vec::Zero(1))[0] == doctest::Approx(0.25));
}
