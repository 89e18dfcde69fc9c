#include "mfglab/cli.hpp"
#include "mfglab/config.hpp"
#include "mfglab/convex_sets.hpp"
#include "mfglab/mean_field.hpp"
#include "mfglab/noise.hpp"
#include "mfglab/oracles.hpp"
#include "mfglab/population.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

namespace py = pybind11;
using namespace mfglab;

namespace {

py::array_t<double> to_array(const MeanPath& z) {
    py::array_t<double> a({z.nodes(), z.dim()});
    std::copy(z.raw().begin(), z.raw().end(), a.mutable_data());
    return a;
}

py::array_t<double> to_array(const PathArray& x) {
    py::array_t<double> a({static_cast<long>(x.steps()), x.paths(), static_cast<long>(x.dim())});
    std::copy(x.raw().begin(), x.raw().end(), a.mutable_data());
    return a;
}

MeanPath to_mean_path(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, int nodes, int dim) {
    if (a.ndim() != 2 || a.shape(0) != nodes || a.shape(1) != dim)
        throw InvalidArgument("mean path must have shape (K+1, n)");
    MeanPath z(nodes, dim);
    for (int k = 0; k < nodes; ++k)
        for (int j = 0; j < dim; ++j) z(k, j) = a.at(k, j);
    return z;
}

/// A parsed instance plus an optional solved equilibrium.
struct Problem {
    ExperimentConfig cfg;
    std::shared_ptr<Model> model;
    std::optional<FixedPointResult> result;
    std::optional<Equilibrium> eq;

    explicit Problem(const std::string& text) : cfg(parse_config(text)) {
        model = std::make_shared<Model>(cfg.model, cfg.strict_h1);
    }

    const Equilibrium& equilibrium() const {
        if (!eq) throw InvalidArgument("call solve() first");
        return *eq;
    }

    MeanPath mean_or(const std::optional<py::array_t<double>>& z) const {
        if (z) return to_mean_path(*z, model->K() + 1, model->n());
        if (eq) return eq->z;
        if (model->gamma().is_full_space()) return riccati_mean_fixed_point(*model);
        throw InvalidArgument("a mean path is required: pass z or call solve() first");
    }
};

py::dict fit_dict(const RateTable& t) {
    py::dict out;
    for (const Fit& f : t.fits) {
        py::dict d;
        d["slope"] = f.slope;
        d["stderr"] = f.stderr_slope;
        d["intercept"] = f.intercept;
        d["C_bound"] = f.c_bound;
        d["Ns"] = f.Ns;
        d["values"] = f.values;
        out[py::str(f.metric)] = d;
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Linear-quadratic mean-field games with convex control constraints";

    py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(mod, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

    mod.def("validate", [](const std::string& text) {
        const ExperimentConfig c = parse_config(text);
        std::vector<std::string> out;
        for (const auto& v : validate(c.model, c.strict_h1).violations)
            out.push_back("(" + v.assumption + ") node " + std::to_string(v.node) + ": " + v.message);
        return out;
    }, py::arg("config_json"), "Assumption violations of a configuration; empty when valid.");

    mod.def("project", [](const std::string& gamma_json, const Vec& x, std::optional<Mat> r) {
        const ConvexSet s = parse_gamma(gamma_json, static_cast<int>(x.size()));
        return r ? project_weighted(s, x, WeightMatrix(*r)) : s.project(x);
    }, py::arg("gamma_json"), py::arg("x"), py::arg("R") = py::none(),
       "Projection onto a convex set given as JSON, Euclidean or in the R-norm.");

    mod.def("run_cli", [](const std::vector<std::string>& args) { return run_cli(args); }, py::arg("args"));

    py::class_<Problem>(mod, "Problem")
        .def(py::init<const std::string&>(), py::arg("config_json"))
        .def_property_readonly("n", [](const Problem& p) { return p.model->n(); })
        .def_property_readonly("m", [](const Problem& p) { return p.model->m(); })
        .def_property_readonly("K", [](const Problem& p) { return p.model->K(); })
        .def_property_readonly("T", [](const Problem& p) { return p.model->grid().T; })
        .def_property_readonly("seed", [](const Problem& p) { return p.cfg.seed; })
        .def("solve", [](Problem& p, std::optional<long> paths, std::optional<std::uint64_t> seed) {
            SolverSettings s = p.cfg.solver;
            if (paths) s.paths = *paths;
            const std::uint64_t sd = seed.value_or(p.cfg.seed);
            FixedPointResult res;
            {
                py::gil_scoped_release release;
                res = fixed_point_iterate(*p.model, s.fixed_point(),
                                          NoiseBank::generate(sd, s.paths, p.model->K(), p.model->dt()));
            }
            p.eq = Equilibrium::from(res);
            p.result = std::move(res);
            py::dict d;
            d["converged"] = p.result->converged();
            d["outer_iterations"] = p.result->diagnostics.size();
            d["consistency_residual"] = p.result->consistency_residual;
            std::vector<double> resid;
            for (const auto& r : p.result->diagnostics) resid.push_back(r.residual);
            d["residuals"] = resid;
            const CostEstimate j =
                limit_cost_estimate(*p.model, p.result->z, p.result->sol.ensemble.x, p.result->sol.ensemble.u);
            d["cost"] = j.mean;
            d["cost_stderr"] = j.std_error;
            return d;
        }, py::arg("paths") = py::none(), py::arg("seed") = py::none(),
           "Damped fixed-point iteration; returns a summary and keeps the equilibrium.")
        .def_property_readonly("z", [](const Problem& p) { return to_array(p.equilibrium().z); })
        .def_property_readonly("mean_control", [](const Problem& p) { return to_array(p.equilibrium().mean_control); })
        .def_property_readonly("states", [](const Problem& p) {
            p.equilibrium();
            return to_array(p.result->sol.ensemble.x);
        })
        .def_property_readonly("controls", [](const Problem& p) {
            p.equilibrium();
            return to_array(p.result->sol.ensemble.u);
        })
        .def("riccati", [](const Problem& p, std::optional<py::array_t<double>> z) {
            const RiccatiSolution s = solve_riccati(*p.model, p.mean_or(z));
            py::dict d;
            d["P"] = s.P;
            d["s"] = s.s;
            d["r"] = s.r;
            d["K_fb"] = s.K_fb;
            d["k_ff"] = s.k_ff;
            return d;
        }, py::arg("z") = py::none(), "Riccati solution for gamma = full at a frozen mean path.")
        .def("riccati_mean", [](const Problem& p) { return to_array(riccati_mean_fixed_point(*p.model)); })
        .def("dp", [](const Problem& p, std::optional<py::array_t<double>> z, int points) {
            const MeanPath zz = p.mean_or(z);
            const DPValueTable t = solve_dp_1d(*p.model, zz, default_lattice(*p.model, zz, points));
            py::dict d;
            std::vector<double> xs(t.points);
            for (int j = 0; j < t.points; ++j) xs[j] = t.x(j);
            d["x"] = xs;
            d["value"] = t.value;
            d["policy"] = t.policy;
            d["V0"] = t.value_at(0, p.model->x0()[0]);
            return d;
        }, py::arg("z") = py::none(), py::arg("points") = 801, "Dynamic programming oracle for n = m = 1.")
        .def("rates", [](const Problem& p, std::optional<std::vector<int>> Ns, std::optional<int> reps) {
            RateExperiment e;
            e.Ns = Ns.value_or(p.cfg.experiment.Ns);
            e.reps = reps.value_or(p.cfg.experiment.reps);
            e.seed = p.cfg.seed;
            e.family = p.cfg.experiment.family(p.model->m());
            RateTable t;
            {
                py::gil_scoped_release release;
                t = population_rates(*p.model, p.equilibrium(), e);
            }
            return fit_dict(t);
        }, py::arg("Ns") = py::none(), py::arg("reps") = py::none(), "Log-log fits of the population metrics.")
        .def("nash", [](const Problem& p, std::optional<std::vector<int>> Ns, std::optional<int> reps) {
            RateTable t;
            {
                py::gil_scoped_release release;
                t = nash_gap(*p.model, p.equilibrium(), Ns.value_or(p.cfg.experiment.nash_Ns),
                             p.cfg.experiment.family(p.model->m()), reps.value_or(p.cfg.experiment.reps), p.cfg.seed);
            }
            std::vector<std::tuple<int, int, std::string, double, double, double>> rows;
            for (const auto& r : t.nash) rows.emplace_back(r.N, r.rep, r.deviation_id, r.cost_dev, r.cost_eq, r.gap);
            py::dict d = fit_dict(t);
            d["rows"] = rows;
            return d;
        }, py::arg("Ns") = py::none(), py::arg("reps") = py::none(), "Empirical epsilon-Nash gap over the family.");
}
