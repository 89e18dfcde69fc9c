#include "mfglab/config.hpp"
#include "mfglab/io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace mfglab;
using namespace mfglab::testing;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = R"({"model": {"n": 1, "m": 1, "T": 2.0}})";

} // namespace

TEST_CASE("config defaults") {
    const ExperimentConfig c = parse_config(kMinimal);
    CHECK(c.model.grid.K == 100);
    CHECK(c.model.grid.T == 2.0);
    CHECK(c.model.coeffs.Q[0](0, 0) == 1.0);
    CHECK(c.model.coeffs.R[50](0, 0) == 1.0);
    CHECK(c.model.coeffs.A[0](0, 0) == 0.0);
    CHECK(c.model.coeffs.G(0, 0) == 0.0);
    CHECK(c.model.x0[0] == 0.0);
    CHECK(c.model.gamma.is_full_space());
    CHECK(c.strict_h1);
    CHECK(c.seed == 1);
    CHECK(c.solver.paths == 20000);
    CHECK(c.solver.degree == 3);
    CHECK(c.experiment.reps == 64);
    CHECK(c.experiment.family(1).size() == 11);
    CHECK(c.output.empty());
}

TEST_CASE("config errors name the field") {
    CHECK(error_of(R"({"model": {"n": 1, "m": 1}})").find("model.T") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1, "Qx": 1}})").find("model.Qx") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1}, "extra": 0})").find("extra") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": -1}})").find("model.T") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 2, "m": 1, "T": 1, "x0": [1]}})").find("model.x0") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1}, "solver": {"theta": 0}})").find("solver") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1}, "seed": -3})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1}, "gamma": {"type": "cone"}})").find("gamma") != std::string::npos);
    const std::string syntax = error_of("{\"model\": {\"n\": 1,\n \"m\": 1,, \"T\": 1}}");
    CHECK(syntax.find("line 2") != std::string::npos);
}

TEST_CASE("config coefficient forms") {
    const ExperimentConfig c = parse_config(R"({
      "model": {"n": 2, "m": 1, "T": 1, "K": 3, "x0": [1, 2],
                "A": [[0.1, 0.2], [0.2, 0.3]], "B": [[1], [0]], "Q": 2.5,
                "b": {"nodes": [[0, 0], [1, 1], [2, 2], [3, 3]]},
                "R": [[[1]], [[2]], [[3]], [[4]]]}
    })");
    CHECK(c.model.coeffs.A[2](1, 0) == 0.2);
    CHECK(c.model.coeffs.B[0](0, 0) == 1.0);
    CHECK(c.model.coeffs.Q[1] == 2.5 * Mat::Identity(2, 2));
    CHECK(c.model.coeffs.b[2][1] == 2.0);
    CHECK(c.model.coeffs.R[3](0, 0) == 4.0);
    CHECK(error_of(R"({"model": {"n": 1, "m": 1, "T": 1, "K": 3, "R": {"nodes": [1, 2]}}})").find("model.R") !=
          std::string::npos);
}

TEST_CASE("config gamma variants") {
    CHECK(parse_gamma(R"({"type": "full"})", 2).is_full_space());
    CHECK(parse_gamma(R"({"type": "orthant"})", 2).type_name() == "orthant");
    const ConvexSet box = parse_gamma(R"({"type": "box", "lower": [0, null], "upper": [null, 1]})", 2);
    Vec x(2);
    x << -5, 5;
    CHECK(box.project(x) == Vec::Zero(2) + (Vec(2) << 0, 1).finished());
    CHECK(parse_gamma(R"({"type": "ball", "center": [0, 0], "radius": 2})", 2).type_name() == "ball");
    CHECK(parse_gamma(R"({"type": "halfspace", "normal": [1, 1], "offset": 0})", 2).type_name() == "halfspace");
    CHECK(parse_gamma(R"({"type": "singleton", "point": [1, 2]})", 2).is_singleton());
    CHECK_THROWS_AS(parse_gamma(R"({"type": "ball", "center": [0], "radius": 2})", 2), ConfigError);
    CHECK_THROWS_AS(parse_gamma(R"({"type": "box", "lower": [1], "upper": [0]})", 1), ConfigError);
}

TEST_CASE("config sections") {
    const ExperimentConfig c = parse_config(R"({
      "model": {"n": 1, "m": 1, "T": 1, "strict_h1": false, "r_min": 1e-6},
      "solver": {"paths": 500, "basis_degree": 2, "theta": 0.7, "rho": 0.3, "tol_u": 1e-6, "tol_z": null,
                 "max_picard": 50, "max_outer": 20, "warm_start": false},
      "experiment": {"Ns": [5, 50, 500], "nash_Ns": [5, 10], "reps": 8, "agents": 12, "lattice_points": 101,
                     "deviations": {"constants": [[0.5]], "lambdas": [1, 2], "reversed": false}},
      "seed": 99, "output": "somewhere"
    })");
    CHECK(!c.strict_h1);
    CHECK(c.model.r_min == 1e-6);
    CHECK(c.solver.paths == 500);
    CHECK(c.solver.theta == 0.7);
    CHECK(c.solver.tol_z == 0.0);
    CHECK(!c.solver.warm_start);
    const FixedPointConfig fp = c.solver.fixed_point();
    CHECK(fp.rho == 0.3);
    CHECK(fp.inner.degree == 2);
    CHECK(fp.inner.max_iter == 50);
    CHECK(c.experiment.Ns == std::vector<int>{5, 50, 500});
    CHECK(c.experiment.agents == 12);
    const auto fam = c.experiment.family(1);
    REQUIRE(fam.size() == 3);
    CHECK(fam[0].id() == "const(0.5)");
    CHECK(fam[2].id() == "lambda=2");
    CHECK(c.seed == 99);
    CHECK(c.output == "somewhere");
}

TEST_CASE("model hash ignores formatting and solver settings") {
    const ExperimentConfig a = parse_config(R"({"model": {"n": 1, "m": 1, "T": 1, "A": 0.5}, "seed": 1})");
    const ExperimentConfig b = parse_config("{ \"seed\": 7,\n \"model\": {\"A\": 0.5, \"T\": 1, \"m\": 1, \"n\": 1},"
                                            " \"solver\": {\"paths\": 10}}");
    CHECK(a.model_json == b.model_json);
    const ExperimentConfig c = parse_config(R"({"model": {"n": 1, "m": 1, "T": 1, "A": 0.6}})");
    CHECK(a.model_json != c.model_json);
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("csv quoting and number formatting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(NAN) == "nan");
}

TEST_CASE("csv writer and reader") {
    const auto dir = std::filesystem::temp_directory_path() / "mfglab_csv_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "t.csv").string();
    {
        CsvWriter w(path, {"id", "value"});
        w << "a,1" << 0.5;
        w.end_row();
    }
    {
        CsvWriter w((dir / "bad.csv").string(), {"id", "value"});
        w << "b";
        CHECK_THROWS_AS(w.end_row(), ShapeMismatch);
    }
    CHECK_THROWS_AS(read_csv((dir / "bad.csv").string()), IoError);
    const CsvTable t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"id", "value"});
    CHECK(t.rows.at(0) == std::vector<std::string>{"a,1", "0.5"});
    CHECK(t.column("value") == 1);
    CHECK_THROWS_AS(t.column("nope"), IoError);
    CHECK_THROWS_AS(read_csv((dir / "missing.csv").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("equilibrium round trip") {
    Scalar s;
    s.F = 0.5;
    s.sigma = 0.4;
    s.K = 10;
    s.gamma = ConvexSet::interval(-0.2, 0.5);
    const Model m = s.model();
    FixedPointConfig c;
    c.inner.paths = 500;
    const Equilibrium eq = Equilibrium::from(fixed_point_iterate(m, c, NoiseBank::generate(1, 500, m.K(), m.dt())));
    const auto dir = std::filesystem::temp_directory_path() / "mfglab_eq_test";
    std::filesystem::create_directories(dir);
    save_equilibrium(dir.string(), m, eq);
    const Equilibrium back = load_equilibrium(dir.string(), m);
    CHECK(back.z == eq.z);
    CHECK(back.mean_control == eq.mean_control);
    CHECK(back.policy.degree() == eq.policy.degree());
    for (int k = 0; k <= m.K(); ++k) {
        for (double x : {-1.0, 0.3, 2.0}) {
            double p1, q1, p2, q2;
            eq.policy.adjoint(k, &x, &p1, &q1);
            back.policy.adjoint(k, &x, &p2, &q2);
            CHECK(p1 == p2);
            CHECK(q1 == q2);
        }
    }
    s.K = 11;
    CHECK_THROWS_AS(load_equilibrium(dir.string(), s.model()), ShapeMismatch);
    std::filesystem::remove_all(dir);
}
