#include "mfglab/cli.hpp"

#include "mfglab/config.hpp"
#include "mfglab/io.hpp"
#include "mfglab/oracles.hpp"
#include "mfglab/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

namespace mfglab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
    std::string command;
    std::string config;
    std::string from;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<long> paths;
    std::optional<int> agents;
    std::optional<int> steps;
    std::optional<int> reps;
    int threads = 0;
};

class UsageError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Loaded {
    ExperimentConfig cfg;
    std::string text;  // config bytes actually used
};

Loaded load(const Options& o) {
    std::string path = o.config;
    if (path.empty()) {
        if (o.from.empty()) throw UsageError("--config is required");
        path = o.from + "/config.json";
    }
    Loaded l;
    l.text = read_text(path);
    if (o.steps) {
        nlohmann::json root;
        try {
            root = nlohmann::json::parse(l.text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("syntax error: ") + e.what());
        }
        if (root.is_object() && root.contains("model") && root["model"].is_object()) root["model"]["K"] = *o.steps;
        l.text = root.dump(2) + "\n";
    }
    l.cfg = parse_config(l.text);
    if (o.seed) l.cfg.seed = *o.seed;
    if (o.paths) l.cfg.solver.paths = *o.paths;
    if (o.agents) l.cfg.experiment.agents = *o.agents;
    if (o.reps) l.cfg.experiment.reps = *o.reps;
    if (l.cfg.solver.paths < 2) throw ConfigError("solver.paths: must be at least 2");
    if (l.cfg.experiment.agents < 1) throw ConfigError("experiment.agents: must be positive");
    if (l.cfg.experiment.reps < 2) throw ConfigError("experiment.reps: must be at least 2");
    return l;
}

std::string output_root(const Options& o, const ExperimentConfig& cfg) {
    if (!o.out.empty()) return o.out;
    if (!cfg.output.empty()) return cfg.output;
    if (const char* env = std::getenv("MFGLAB_OUT"); env && *env) return env;
    return "runs";
}

/// A new directory root/<command>-<UTC stamp>[-i]; never reuses an existing one.
std::string fresh_run_dir(const std::string& root, const std::string& command) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root + ": " + ec.message());
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    const std::string base = root + "/" + command + "-" + stamp;
    for (int i = 0; i < 100000; ++i) {
        const std::string dir = i == 0 ? base : base + "-" + std::to_string(i + 1);
        if (fs::create_directory(dir, ec)) return dir;
        if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
    }
    throw IoError("no free run directory under " + root);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    f.close();
    if (f.fail()) throw IoError("write failed: " + path);
}

json base_manifest(const std::string& command, const Loaded& l) {
    json m;
    m["command"] = command;
    m["seed"] = l.cfg.seed;
    m["config_hash"] = hex64(fnv1a(l.text));
    m["model_hash"] = hex64(fnv1a(l.cfg.model_json));
    m["n"] = l.cfg.model.n;
    m["m"] = l.cfg.model.m;
    m["K"] = l.cfg.model.grid.K;
    m["T"] = l.cfg.model.grid.T;
    m["gamma"] = std::string(l.cfg.model.gamma.type_name());
    return m;
}

json check_prior_run(const std::string& from, const Loaded& l) {
    if (from.empty()) throw UsageError("--from DIR (a solve run directory) is required");
    const std::string path = from + "/manifest.json";
    json prior;
    try {
        prior = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!prior.contains("model_hash") || prior["command"] != "solve")
        throw IoError(path + " is not a solve manifest");
    if (prior["model_hash"] != hex64(fnv1a(l.cfg.model_json)))
        throw ConfigError("model: differs from the model solved in " + from);
    return prior;
}

std::vector<std::string> indexed(const std::string& prefix, int rows, int cols = 0) {
    std::vector<std::string> out;
    for (int i = 1; i <= rows; ++i) {
        if (cols == 0) {
            out.push_back(prefix + "_" + std::to_string(i));
        } else {
            for (int j = 1; j <= cols; ++j) out.push_back(prefix + "_" + std::to_string(i) + std::to_string(j));
        }
    }
    return out;
}

double riccati_control_rel_error(const Model& model, const RiccatiSolution& ric, const FBSDESolution& sol) {
    const PathArray& x = sol.ensemble.x;
    const PathArray& u = sol.ensemble.u;
    double err = 0.0;
    double ref = 0.0;
    Vec xi(model.n());
    for (int k = 0; k < model.K(); ++k) {
        for (long i = 0; i < u.paths(); ++i) {
            for (int j = 0; j < model.n(); ++j) xi[j] = x(k, i, j);
            const Vec r = ric.control(k, xi);
            for (int j = 0; j < model.m(); ++j) {
                err += (u(k, i, j) - r[j]) * (u(k, i, j) - r[j]);
                ref += r[j] * r[j];
            }
        }
    }
    return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err / static_cast<double>(u.paths() * model.K()));
}

json oracle_check(const Model& model, const FixedPointResult& res) {
    json c;
    if (model.gamma().is_full_space()) {
        c["kind"] = "riccati";
        try {
            const MeanPath zr = riccati_mean_fixed_point(model);
            double scale = 1.0;
            for (double v : zr.raw()) scale = std::max(scale, std::abs(v));
            c["z_max_rel_error"] = MeanPath::max_abs_diff(zr, res.z) / scale;
            c["control_rel_l2_error"] = riccati_control_rel_error(model, solve_riccati(model, res.z), res.sol);
            c["status"] = "ok";
        } catch (const Error& e) {
            c["status"] = std::string("failed: ") + e.what();
        }
    } else if (model.n() == 1 && model.m() == 1) {
        c["kind"] = "dp";
        try {
            const DPValueTable dp = solve_dp_1d(model, res.z, default_lattice(model, res.z));
            const CostEstimate j = limit_cost_estimate(model, res.z, res.sol.ensemble.x, res.sol.ensemble.u);
            const double v0 = dp.value_at(0, model.x0()[0]);
            c["dp_value"] = v0;
            c["solver_cost"] = j.mean;
            c["solver_cost_stderr"] = j.std_error;
            c["rel_gap"] = (j.mean - v0) / std::max(std::abs(v0), 1e-300);
            c["status"] = "ok";
        } catch (const Error& e) {
            c["status"] = std::string("failed: ") + e.what();
        }
    } else {
        c["kind"] = "none";
        c["status"] = "no oracle for constrained instances with n or m above 1";
    }
    return c;
}

int cmd_validate(const Options& o) {
    const Loaded l = load(o);
    const ValidationReport report = validate(l.cfg.model, l.cfg.strict_h1);
    if (report.ok()) {
        std::cout << "valid: n=" << l.cfg.model.n << " m=" << l.cfg.model.m << " K=" << l.cfg.model.grid.K
                  << " T=" << l.cfg.model.grid.T << " gamma=" << l.cfg.model.gamma.type_name() << "\n";
        return kExitOk;
    }
    std::cout << report.to_string() << "\n";
    return kExitInvalid;
}

int cmd_solve(const Options& o) {
    const Loaded l = load(o);
    const Model model(l.cfg.model, l.cfg.strict_h1);
    const FixedPointConfig fp = l.cfg.solver.fixed_point();
    const NoiseBank noise = NoiseBank::generate(l.cfg.seed, l.cfg.solver.paths, model.K(), model.dt());
    const FixedPointResult res = fixed_point_iterate(model, fp, noise);

    const std::string dir = fresh_run_dir(output_root(o, l.cfg), "solve");
    write_text(dir + "/config.json", l.text);
    const Equilibrium eq = Equilibrium::from(res);
    save_equilibrium(dir, model, eq);
    {
        CsvWriter w(dir + "/diagnostics.csv", {"outer_iteration", "residual", "inner_iterations", "inner_converged"});
        for (const auto& r : res.diagnostics) {
            w << r.iteration << r.residual << r.inner_iterations << (r.inner_converged ? 1 : 0);
            w.end_row();
        }
        w.close();
    }

    json m = base_manifest("solve", l);
    const SolverSettings& s = l.cfg.solver;
    m["paths"] = s.paths;
    m["basis_degree"] = s.degree;
    m["theta"] = s.theta;
    m["rho"] = s.rho;
    m["tol_u"] = s.tol_u;
    m["tol_z"] = fp.resolved_tol(model);
    m["max_picard"] = s.max_picard;
    m["max_outer"] = s.max_outer;
    m["warm_start"] = s.warm_start;
    const char* status = res.status == FixedPointStatus::Converged           ? "converged"
                         : res.status == FixedPointStatus::InnerNotConverged ? "inner_not_converged"
                                                                             : "outer_not_converged";
    m["status"] = status;
    m["outer_iterations"] = res.diagnostics.size();
    m["consistency_residual"] = res.consistency_residual;
    m["mean_ode_residual"] = mean_ode_check(model, res.z, res.sol);
    m["picard_log"] = res.sol.log;
    m["regression_rank_deficient_nodes"] = res.sol.backward.rank_deficient_nodes;
    m["oracle_check"] = oracle_check(model, res);
    write_text(dir + "/manifest.json", m.dump(2) + "\n");

    std::cout << "run: " << dir << "\n"
              << "status: " << status << " after " << res.diagnostics.size() << " outer iterations, residual "
              << (res.diagnostics.empty() ? 0.0 : res.diagnostics.back().residual) << "\n";
    const json& oc = m["oracle_check"];
    if (oc["kind"] == "riccati" && oc["status"] == "ok")
        std::cout << "riccati check: z rel error " << oc["z_max_rel_error"].get<double>() << ", control rel L2 error "
                  << oc["control_rel_l2_error"].get<double>() << "\n";
    if (oc["kind"] == "dp" && oc["status"] == "ok")
        std::cout << "dp check: V0 " << oc["dp_value"].get<double>() << ", solver cost " << oc["solver_cost"].get<double>()
                  << " +- " << oc["solver_cost_stderr"].get<double>() << "\n";
    return res.converged() ? kExitOk : kExitNotConverged;
}

int cmd_oracle(const Options& o) {
    const Loaded l = load(o);
    const Model model(l.cfg.model, l.cfg.strict_h1);
    const bool riccati = model.gamma().is_full_space();
    const bool dp = model.n() == 1 && model.m() == 1;
    if (!riccati && !dp) throw ConfigError("gamma: oracles need gamma = full or n = m = 1");
    MeanPath z;
    std::string z_source;
    json m_source;
    if (!o.from.empty()) {
        m_source = check_prior_run(o.from, l);
        z = load_equilibrium(o.from, model).z;
        z_source = "run";
    } else if (riccati) {
        z = riccati_mean_fixed_point(model);
        z_source = "riccati_fixed_point";
    } else {
        throw UsageError("constrained oracle needs --from DIR for the frozen mean path");
    }

    const std::string dir = fresh_run_dir(output_root(o, l.cfg), "oracle");
    write_text(dir + "/config.json", l.text);
    json m = base_manifest("oracle", l);
    m["z_source"] = z_source;
    if (!o.from.empty()) m["source_config_hash"] = m_source["config_hash"];
    const int n = model.n();
    const int mm = model.m();
    if (riccati) {
        const RiccatiSolution sol = solve_riccati(model, z);
        std::vector<std::string> h{"t"};
        for (auto v : {indexed("P", n, n), indexed("s", n), indexed("K_fb", mm, n), indexed("k_ff", mm)})
            h.insert(h.end(), v.begin(), v.end());
        h.push_back("r");
        h.push_back("z_1");
        CsvWriter w(dir + "/riccati.csv", h);
        for (int k = 0; k <= model.K(); ++k) {
            w << model.grid().t(k);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) w << sol.P[k](i, j);
            for (int i = 0; i < n; ++i) w << sol.s[k][i];
            for (int i = 0; i < mm; ++i)
                for (int j = 0; j < n; ++j) w << sol.K_fb[k](i, j);
            for (int i = 0; i < mm; ++i) w << sol.k_ff[k][i];
            w << sol.r[k] << z(k, 0);
            w.end_row();
        }
        w.close();
        m["riccati_value_x0"] = sol.value(0, model.x0());
        std::cout << "riccati: V0(x0) = " << sol.value(0, model.x0()) << "\n";
    }
    if (dp) {
        const DPLattice lattice = default_lattice(model, z, l.cfg.experiment.lattice_points);
        const DPValueTable table = solve_dp_1d(model, z, lattice);
        CsvWriter w(dir + "/dp.csv", {"t", "x", "value", "policy"});
        for (int k = 0; k <= model.K(); ++k) {
            for (int j = 0; j < table.points; ++j) {
                w << model.grid().t(k) << table.x(j) << table.value[k][j];
                if (k < model.K()) w << table.policy[k][j];
                else w << "";
                w.end_row();
            }
        }
        w.close();
        const double v0 = table.value_at(0, model.x0()[0]);
        m["dp_lattice"] = {{"lower", table.lower}, {"upper", table.upper}, {"points", table.points}};
        m["dp_value_x0"] = v0;
        m["dp_max_exit_fraction"] = table.max_exit_fraction;
        std::cout << "dp: V0(x0) = " << v0 << " on [" << table.lower << ", " << table.upper << "] with "
                  << table.points << " points\n";
    }
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    std::cout << "run: " << dir << "\n";
    return kExitOk;
}

struct Prepared {
    Loaded l;
    json source;
    Model model;
    Equilibrium eq;
};

Prepared prepare_from(const Options& o) {
    Loaded l = load(o);
    Model model(l.cfg.model, l.cfg.strict_h1);
    json source = check_prior_run(o.from, l);
    Equilibrium eq = load_equilibrium(o.from, model);
    return {std::move(l), std::move(source), std::move(model), std::move(eq)};
}

void print_fits(const RateTable& t) {
    for (const auto& f : t.fits) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-28s slope %8.4f +- %.4f  C %.4g  (%d points)", f.metric.c_str(), f.slope,
                      f.stderr_slope, f.c_bound, f.points);
        std::cout << line << "\n";
    }
}

int cmd_population(const Options& o) {
    const Prepared p = prepare_from(o);
    const int N = p.l.cfg.experiment.agents;
    const int reps = p.l.cfg.experiment.reps;
    const PopulationRun run = simulate_population(p.model, p.eq, N, reps, p.l.cfg.seed);
    const std::string dir = fresh_run_dir(output_root(o, p.l.cfg), "population");
    write_text(dir + "/config.json", p.l.text);
    const int n = p.model.n();
    const int K = p.model.K();
    {
        std::vector<std::string> h{"rep", "k", "t"};
        for (auto& s : indexed("xbar", n)) h.push_back(s);
        for (auto& s : indexed("z", n)) h.push_back(s);
        CsvWriter w(dir + "/average.csv", h);
        for (int r = 0; r < reps; ++r) {
            const auto& rep = run.reps[static_cast<std::size_t>(r)];
            for (int k = 0; k <= K; ++k) {
                w << r << k << p.model.grid().t(k);
                for (int j = 0; j < n; ++j) w << rep.average(k, j);
                for (int j = 0; j < n; ++j) w << p.eq.z(k, j);
                w.end_row();
            }
        }
        w.close();
    }
    {
        CsvWriter w(dir + "/costs.csv", {"rep", "agent", "coupled_cost", "limit_cost", "sup_state_gap"});
        for (int r = 0; r < reps; ++r) {
            const auto& rep = run.reps[static_cast<std::size_t>(r)];
            for (int i = 0; i < N; ++i) {
                double gap = 0.0;
                for (int k = 0; k <= K; ++k) {
                    double d2 = 0.0;
                    for (int j = 0; j < n; ++j) {
                        const double d = rep.coupled(k, i, j) - rep.limit(k, i, j);
                        d2 += d * d;
                    }
                    gap = std::max(gap, d2);
                }
                w << r << i << rep.coupled_cost[static_cast<std::size_t>(i)] << rep.limit_cost[static_cast<std::size_t>(i)]
                  << gap;
                w.end_row();
            }
        }
        w.close();
    }
    {
        // Full trajectories of the first replication only.
        const auto& rep = run.reps.front();
        std::vector<std::string> h{"agent", "k", "t"};
        for (auto& s : indexed("x", n)) h.push_back(s);
        for (auto& s : indexed("alpha", n)) h.push_back(s);
        for (auto& s : indexed("u", p.model.m())) h.push_back(s);
        CsvWriter w(dir + "/trajectories.csv", h);
        for (int i = 0; i < N; ++i) {
            for (int k = 0; k <= K; ++k) {
                w << i << k << p.model.grid().t(k);
                for (int j = 0; j < n; ++j) w << rep.coupled(k, i, j);
                for (int j = 0; j < n; ++j) w << rep.limit(k, i, j);
                for (int j = 0; j < p.model.m(); ++j) {
                    if (k < K) w << rep.control(k, i, j);
                    else w << "";
                }
                w.end_row();
            }
        }
        w.close();
    }
    json m = base_manifest("population", p.l);
    m["source_config_hash"] = p.source["config_hash"];
    m["agents"] = N;
    m["reps"] = reps;
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    std::cout << "run: " << dir << "\n";
    return kExitOk;
}

void write_tables(const std::string& dir, const RateTable& t) {
    write_rates_csv(dir + "/rates.csv", t);
    write_nash_csv(dir + "/nash.csv", t);
    write_fits_csv(dir + "/fits.csv", t);
}

int cmd_rates(const Options& o) {
    const Prepared p = prepare_from(o);
    RateExperiment ex;
    ex.Ns = p.l.cfg.experiment.Ns;
    ex.reps = p.l.cfg.experiment.reps;
    ex.seed = p.l.cfg.seed;
    ex.family = p.l.cfg.experiment.family(p.model.m());
    const RateTable t = population_rates(p.model, p.eq, ex);
    const std::string dir = fresh_run_dir(output_root(o, p.l.cfg), "rates");
    write_text(dir + "/config.json", p.l.text);
    write_tables(dir, t);
    json m = base_manifest("rates", p.l);
    m["source_config_hash"] = p.source["config_hash"];
    m["Ns"] = ex.Ns;
    m["reps"] = ex.reps;
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    std::cout << "run: " << dir << "\nfits (log value vs log N):\n";
    print_fits(t);
    return kExitOk;
}

int cmd_nash(const Options& o) {
    const Prepared p = prepare_from(o);
    const auto family = p.l.cfg.experiment.family(p.model.m());
    const RateTable t = nash_gap(p.model, p.eq, p.l.cfg.experiment.nash_Ns, family, p.l.cfg.experiment.reps, p.l.cfg.seed);
    const std::string dir = fresh_run_dir(output_root(o, p.l.cfg), "nash");
    write_text(dir + "/config.json", p.l.text);
    write_tables(dir, t);
    json m = base_manifest("nash", p.l);
    m["source_config_hash"] = p.source["config_hash"];
    m["Ns"] = p.l.cfg.experiment.nash_Ns;
    m["reps"] = p.l.cfg.experiment.reps;
    std::vector<std::string> ids;
    for (const auto& d : family) ids.push_back(d.id());
    m["family"] = ids;
    write_text(dir + "/manifest.json", m.dump(2) + "\n");
    std::cout << "run: " << dir << "\n";
    if (t.has_fit("nash")) {
        const Fit& f = t.fit("nash");
        std::cout << "epsilon(N):";
        for (std::size_t i = 0; i < f.Ns.size(); ++i) std::cout << " N=" << f.Ns[i] << ":" << f.values[i];
        std::cout << "\n";
    }
    print_fits(t);
    return kExitOk;
}

int dispatch(const Options& o) {
    if (o.threads > 0) set_thread_count(o.threads);
    if (o.command == "validate") return cmd_validate(o);
    if (o.command == "solve") return cmd_solve(o);
    if (o.command == "oracle") return cmd_oracle(o);
    if (o.command == "population") return cmd_population(o);
    if (o.command == "rates") return cmd_rates(o);
    if (o.command == "nash") return cmd_nash(o);
    throw UsageError("unknown command " + o.command);
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Mean-field game solver and finite-population experiments"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    long paths = 0;
    int agents = 0;
    int steps = 0;
    int reps = 0;

    struct Spec {
        const char* name;
        const char* help;
        bool needs_from;
    };
    const Spec specs[] = {
        {"validate", "Check a configuration against the model assumptions", false},
        {"solve", "Solve the mean-field fixed point and write the equilibrium", false},
        {"oracle", "Riccati and 1-D dynamic-programming reference solutions", false},
        {"population", "Simulate the N-agent system under the equilibrium strategies", true},
        {"rates", "Finite-N gap rates with log-log fits", true},
        {"nash", "epsilon-Nash gap over the deviation family", true},
    };
    for (const auto& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Master seed (overrides config)");
        sub->add_option("--out", o.out, "Output root (default: config output, MFGLAB_OUT, runs)");
        sub->add_option("--threads", o.threads, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--paths", paths, "Monte Carlo paths M")->check(CLI::PositiveNumber);
        sub->add_option("--agents", agents, "Population size N")->check(CLI::PositiveNumber);
        sub->add_option("--steps", steps, "Time steps K")->check(CLI::PositiveNumber);
        sub->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
        auto* from = sub->add_option("--from", o.from, "Prior solve run directory")->check(CLI::ExistingDirectory);
        if (s.needs_from) from->required();
        sub->callback([&o, sub] { o.command = sub->get_name(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--paths")) o.paths = paths;
        if (sub->count("--agents")) o.agents = agents;
        if (sub->count("--steps")) o.steps = steps;
        if (sub->count("--reps")) o.reps = reps;
    }

    try {
        return dispatch(o);
    } catch (const NotConverged& e) {
        std::cerr << "error: not converged: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const OuterNotConverged& e) {
        std::cerr << "error: not converged: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationFailed& e) {
        std::cerr << "error: invalid model:\n" << e.what() << "\n";
        return kExitInvalid;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mfglab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace mfglab
