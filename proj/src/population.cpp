#include "mfglab/population.hpp"

#include "mfglab/dynamics.hpp"
#include "mfglab/errors.hpp"
#include "mfglab/noise.hpp"
#include "mfglab/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace mfglab {

namespace {

constexpr std::uint64_t kPopulationDomain = 2;

// 1/2 [ sum_k (<Q d_k, d_k> + <R u_k, u_k>) dt + <G d_K, d_K> ] where d_k is
// produced by diff(k, out).
template <class Diff>
double agent_cost(const Model& model, const PathArray& u, long path, Diff&& diff) {
    const auto& c = model.coeffs();
    const int K = model.K();
    double buf[16];
    std::vector<double> heap;
    double* d = buf;
    if (model.n() > 16) {
        heap.resize(static_cast<std::size_t>(model.n()));
        d = heap.data();
    }
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
        diff(k, d);
        acc += quad_form(c.Q[k], d) + quad_form(c.R[k], u.at(k, path));
    }
    diff(K, d);
    return 0.5 * (acc * model.dt() + quad_form(c.G, d));
}

double sq_norm_diff(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return s;
}

} // namespace

Equilibrium Equilibrium::from(const FixedPointResult& res) {
    Equilibrium eq;
    eq.z = res.z;
    eq.policy = res.sol.backward.policy;
    eq.mean_control = sample_mean(res.sol.ensemble.u);
    return eq;
}

void agent_increments(std::uint64_t seed, int rep, int agent, int steps, double dt, double* out) {
    brownian_increments(derive_seed(seed, kPopulationDomain, static_cast<std::uint64_t>(rep),
                                    static_cast<std::uint64_t>(agent)),
                        steps, dt, out);
}

void step_coupled(const Model& model, const PathArray& control, const PathArray& dw, PathArray& x, MeanPath& average) {
    const int K = model.K();
    const int n = model.n();
    const long N = control.paths();
    if (control.steps() != K || control.dim() != model.m() || dw.steps() != K || dw.paths() != N)
        throw ShapeMismatch("population controls and noise do not match");
    x = PathArray(K + 1, N, n);
    average = MeanPath(K + 1, n);
    const Dynamics dyn(model);
    for (long a = 0; a < N; ++a) {
        for (int j = 0; j < n; ++j) x(0, a, j) = model.x0()[j];
    }
    for (int k = 0; k <= K; ++k) {
        double* avg = average.at(k);
        for (long a = 0; a < N; ++a) {
            const double* xa = x.at(k, a);
            for (int j = 0; j < n; ++j) avg[j] += xa[j];
        }
        for (int j = 0; j < n; ++j) avg[j] /= static_cast<double>(N);
        if (k == K) break;
        for (long a = 0; a < N; ++a) dyn.step(k, x.at(k, a), control.at(k, a), avg, dw(k, a, 0), x.at(k + 1, a));
    }
    for (long a = 0; a < N; ++a) {
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(x(K, a, j))) throw NonFiniteState("coupled population state is not finite", K, a);
        }
    }
}

MeanPath averaged_recursion(const Model& model, const PathArray& control, const PathArray& dw) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const long N = control.paths();
    const auto& c = model.coeffs();
    const double dt = model.dt();
    MeanPath out(K + 1, n);
    Vec xbar = model.x0();
    for (int j = 0; j < n; ++j) out(0, j) = xbar[j];
    for (int k = 0; k < K; ++k) {
        Vec ubar = Vec::Zero(m);
        Vec noise = Vec::Zero(n);
        for (long a = 0; a < N; ++a) {
            const Vec u = Eigen::Map<const Vec>(control.at(k, a), m);
            ubar += u;
            noise += (c.D[k] * u + c.sigma[k]) * dw(k, a, 0);
        }
        ubar /= static_cast<double>(N);
        noise /= static_cast<double>(N);
        xbar = xbar + ((c.A[k] + c.F[k]) * xbar + c.B[k] * ubar + c.b[k]) * dt + noise;
        for (int j = 0; j < n; ++j) out(k + 1, j) = xbar[j];
    }
    return out;
}

Replication simulate_replication(const Model& model, const Equilibrium& eq, int N, int rep, std::uint64_t seed) {
    if (N < 1) throw InvalidArgument("population size must be positive");
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const double dt = model.dt();
    if (eq.z.nodes() != K + 1 || eq.z.dim() != n || eq.policy.nodes() != K + 1)
        throw ShapeMismatch("equilibrium does not match the model grid");
    Replication r;
    r.dw = PathArray(K, N, 1);
    std::vector<double> buf(static_cast<std::size_t>(K));
    for (int a = 0; a < N; ++a) {
        agent_increments(seed, rep, a, K, dt, buf.data());
        for (int k = 0; k < K; ++k) r.dw(k, a, 0) = buf[static_cast<std::size_t>(k)];
    }
    // Limit states and controls: agent a sees only its own increments.
    const Dynamics dyn(model);
    r.limit = PathArray(K + 1, N, n);
    r.control = PathArray(K, N, m);
    for (int a = 0; a < N; ++a) {
        for (int j = 0; j < n; ++j) r.limit(0, a, j) = model.x0()[j];
    }
    for (int k = 0; k < K; ++k) {
        for (int a = 0; a < N; ++a) {
            eq.policy.control(model, k, r.limit.at(k, a), r.control.at(k, a));
            dyn.step(k, r.limit.at(k, a), r.control.at(k, a), eq.z.at(k), r.dw(k, a, 0), r.limit.at(k + 1, a));
        }
    }
    step_coupled(model, r.control, r.dw, r.coupled, r.average);

    r.coupled_cost.resize(static_cast<std::size_t>(N));
    r.limit_cost.resize(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a) {
        r.coupled_cost[static_cast<std::size_t>(a)] = agent_cost(model, r.control, a, [&](int k, double* d) {
            const double* x = r.coupled.at(k, a);
            const double* avg = r.average.at(k);
            for (int j = 0; j < n; ++j) d[j] = x[j] - avg[j];
        });
        r.limit_cost[static_cast<std::size_t>(a)] = agent_cost(model, r.control, a, [&](int k, double* d) {
            const double* x = r.limit.at(k, a);
            const double* z = eq.z.at(k);
            for (int j = 0; j < n; ++j) d[j] = x[j] - z[j];
        });
    }
    return r;
}

PopulationRun simulate_population(const Model& model, const Equilibrium& eq, int N, int reps, std::uint64_t seed) {
    if (reps < 1) throw InvalidArgument("replication count must be positive");
    PopulationRun run;
    run.N = N;
    run.seed = seed;
    run.reps.resize(static_cast<std::size_t>(reps));
    parallel_chunks(reps, 1, [&](long, long begin, long end) {
        for (long r = begin; r < end; ++r)
            run.reps[static_cast<std::size_t>(r)] = simulate_replication(model, eq, N, static_cast<int>(r), seed);
    });
    return run;
}

std::string Deviation::id() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Constant:
        os << "const(";
        for (Eigen::Index j = 0; j < c.size(); ++j) os << (j ? ";" : "") << c[j];
        os << ")";
        break;
    case Kind::Scaled:
        os << "lambda=" << lambda;
        break;
    case Kind::Reversed:
        os << "reversed";
        break;
    }
    return os.str();
}

Deviation Deviation::constant(Vec c) {
    Deviation d;
    d.kind = Kind::Constant;
    d.c = std::move(c);
    return d;
}

Deviation Deviation::scaled(double lambda) {
    if (!std::isfinite(lambda)) throw InvalidArgument("deviation scale must be finite");
    Deviation d;
    d.kind = Kind::Scaled;
    d.lambda = lambda;
    return d;
}

Deviation Deviation::reversed() {
    Deviation d;
    d.kind = Kind::Reversed;
    return d;
}

std::vector<Deviation> deviation_family(const std::vector<Vec>& constants, const std::vector<double>& lambdas,
                                        bool reversed) {
    std::vector<Deviation> out;
    for (const auto& c : constants) out.push_back(Deviation::constant(c));
    for (double l : lambdas) out.push_back(Deviation::scaled(l));
    if (reversed) out.push_back(Deviation::reversed());
    return out;
}

std::vector<Deviation> default_deviation_family(int m) {
    return deviation_family({Vec::Zero(m)}, {0.0, 0.5, 1.0, 1.5}, true);
}

PathArray deviation_control(const Model& model, const Equilibrium& eq, const Replication& rep, int agent,
                            const Deviation& dev) {
    const int K = model.K();
    const int m = model.m();
    if (agent < 0 || agent >= rep.control.paths()) throw InvalidArgument("deviating agent index out of range");
    PathArray u(K, 1, m);
    for (int k = 0; k < K; ++k) {
        double* uk = u.at(k, 0);
        switch (dev.kind) {
        case Deviation::Kind::Constant: {
            if (dev.c.size() != m) throw ShapeMismatch("constant deviation has the wrong dimension");
            const Vec v = model.project_control(k, dev.c);
            for (int j = 0; j < m; ++j) uk[j] = v[j];
            break;
        }
        case Deviation::Kind::Scaled:
            eq.policy.control(model, k, rep.limit.at(k, agent), uk, dev.lambda);
            break;
        case Deviation::Kind::Reversed: {
            const Vec v = model.project_control(k, Eigen::Map<const Vec>(eq.mean_control.at(K - 1 - k), m));
            for (int j = 0; j < m; ++j) uk[j] = v[j];
            break;
        }
        }
        if (!model.gamma().contains(Eigen::Map<const Vec>(uk, m), 1e-9)) {
            std::ostringstream os;
            os << "deviation " << dev.id() << " leaves the control set at step " << k;
            throw InfeasibleDeviation(os.str());
        }
    }
    return u;
}

DeviationRun deviation_run(const Model& model, const Equilibrium& eq, const Replication& rep, int agent,
                           const Deviation& dev) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    DeviationRun out;
    out.agent = agent;
    out.u = deviation_control(model, eq, rep, agent, dev);
    PathArray control = rep.control;
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < m; ++j) control(k, agent, j) = out.u(k, 0, j);
    }
    step_coupled(model, control, rep.dw, out.coupled, out.average);

    const Dynamics dyn(model);
    out.limit = PathArray(K + 1, 1, n);
    for (int j = 0; j < n; ++j) out.limit(0, 0, j) = model.x0()[j];
    for (int k = 0; k < K; ++k)
        dyn.step(k, out.limit.at(k, 0), out.u.at(k, 0), eq.z.at(k), rep.dw(k, agent, 0), out.limit.at(k + 1, 0));

    out.coupled_cost = agent_cost(model, control, agent, [&](int k, double* d) {
        const double* x = out.coupled.at(k, agent);
        const double* avg = out.average.at(k);
        for (int j = 0; j < n; ++j) d[j] = x[j] - avg[j];
    });
    out.limit_cost = agent_cost(model, out.u, 0, [&](int k, double* d) {
        const double* x = out.limit.at(k, 0);
        const double* z = eq.z.at(k);
        for (int j = 0; j < n; ++j) d[j] = x[j] - z[j];
    });
    out.eq_coupled_cost = rep.coupled_cost[static_cast<std::size_t>(agent)];
    for (int k = 0; k <= K; ++k) {
        out.sup_average_gap = std::max(out.sup_average_gap, sq_norm_diff(out.average.at(k), eq.z.at(k), n));
        out.sup_state_gap = std::max(out.sup_state_gap, sq_norm_diff(out.coupled.at(k, agent), out.limit.at(k, 0), n));
    }
    return out;
}

BatchedDeviation deviation_batch(const Model& model, const Equilibrium& eq, const Replication& rep,
                                 const Deviation& dev) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const long N = rep.control.paths();
    const double dt = model.dt();
    const auto& c = model.coeffs();
    BatchedDeviation out;
    out.coupled_cost.resize(static_cast<std::size_t>(N));
    out.limit_cost.resize(static_cast<std::size_t>(N));
    out.sup_average_gap.resize(static_cast<std::size_t>(N));
    out.sup_state_gap.resize(static_cast<std::size_t>(N));

    // Perturbations relative to the equilibrium replication when agent i
    // switches from u_i to v: d for agent i, e for every other agent,
    // dbar for agent i's limit state; delta = (d + (N - 1) e) / N.
    Mat d(n, K + 1);
    Mat e(n, K + 1);
    Mat dbar(n, K + 1);
    Mat delta(n, K + 1);
    Vec du(m);
    for (long i = 0; i < N; ++i) {
        const PathArray v = deviation_control(model, eq, rep, static_cast<int>(i), dev);
        d.col(0).setZero();
        e.col(0).setZero();
        dbar.col(0).setZero();
        delta.col(0).setZero();
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < m; ++j) du[j] = v(k, 0, j) - rep.control(k, i, j);
            const double w = rep.dw(k, i, 0);
            const Vec fd = c.F[k] * delta.col(k);
            const Vec bu = c.B[k] * du;
            const Vec dn = (c.D[k] * du) * w;
            e.col(k + 1) = e.col(k) + (c.A[k] * e.col(k) + fd) * dt;
            d.col(k + 1) = d.col(k) + (c.A[k] * d.col(k) + bu + fd) * dt + dn;
            dbar.col(k + 1) = dbar.col(k) + (c.A[k] * dbar.col(k) + bu) * dt + dn;
            delta.col(k + 1) = (d.col(k + 1) + static_cast<double>(N - 1) * e.col(k + 1)) / static_cast<double>(N);
        }
        out.coupled_cost[static_cast<std::size_t>(i)] = agent_cost(model, v, 0, [&](int k, double* diff) {
            const double* x = rep.coupled.at(k, i);
            const double* avg = rep.average.at(k);
            for (int j = 0; j < n; ++j) diff[j] = (x[j] + d(j, k)) - (avg[j] + delta(j, k));
        });
        out.limit_cost[static_cast<std::size_t>(i)] = agent_cost(model, v, 0, [&](int k, double* diff) {
            const double* x = rep.limit.at(k, i);
            const double* z = eq.z.at(k);
            for (int j = 0; j < n; ++j) diff[j] = (x[j] + dbar(j, k)) - z[j];
        });
        double sa = 0.0;
        double ss = 0.0;
        for (int k = 0; k <= K; ++k) {
            double ga = 0.0;
            double gs = 0.0;
            for (int j = 0; j < n; ++j) {
                const double a = rep.average(k, j) + delta(j, k) - eq.z(k, j);
                const double s = (rep.coupled(k, i, j) + d(j, k)) - (rep.limit(k, i, j) + dbar(j, k));
                ga += a * a;
                gs += s * s;
            }
            sa = std::max(sa, ga);
            ss = std::max(ss, gs);
        }
        out.sup_average_gap[static_cast<std::size_t>(i)] = sa;
        out.sup_state_gap[static_cast<std::size_t>(i)] = ss;
    }
    return out;
}

Fit fit_loglog(const std::string& metric, const std::vector<int>& Ns, const std::vector<double>& values, double rate) {
    if (Ns.size() != values.size()) throw ShapeMismatch("fit inputs differ in length");
    Fit f;
    f.metric = metric;
    f.Ns = Ns;
    f.values = values;
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t r = 0; r < Ns.size(); ++r) {
        f.c_bound = std::max(f.c_bound, values[r] * std::pow(static_cast<double>(Ns[r]), rate));
        if (values[r] > 0.0 && std::isfinite(values[r])) {
            lx.push_back(std::log(static_cast<double>(Ns[r])));
            ly.push_back(std::log(values[r]));
        }
    }
    f.points = static_cast<int>(lx.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (f.points < 2) {
        f.slope = f.stderr_slope = f.intercept = nan;
        return f;
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t r = 0; r < lx.size(); ++r) {
        mx += lx[r];
        my += ly[r];
    }
    mx /= f.points;
    my /= f.points;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t r = 0; r < lx.size(); ++r) {
        sxx += (lx[r] - mx) * (lx[r] - mx);
        sxy += (lx[r] - mx) * (ly[r] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (f.points > 2) {
        double ssr = 0.0;
        for (std::size_t r = 0; r < lx.size(); ++r) {
            const double res = ly[r] - f.intercept - f.slope * lx[r];
            ssr += res * res;
        }
        f.stderr_slope = std::sqrt(ssr / (f.points - 2) / sxx);
    } else {
        f.stderr_slope = nan;
    }
    return f;
}

const Fit& RateTable::fit(const std::string& metric) const {
    for (const auto& f : fits) {
        if (f.metric == metric) return f;
    }
    throw InvalidArgument("no fit for metric " + metric);
}

bool RateTable::has_fit(const std::string& metric) const {
    for (const auto& f : fits) {
        if (f.metric == metric) return true;
    }
    return false;
}

void RateExperiment::validate() const {
    if (Ns.size() < 4) throw InvalidArgument("rate fits need at least 4 distinct N");
    for (std::size_t r = 0; r < Ns.size(); ++r) {
        if (Ns[r] < 1) throw InvalidArgument("population sizes must be positive");
        if (r > 0 && Ns[r] <= Ns[r - 1]) throw InvalidArgument("population sizes must be strictly increasing");
    }
    const double decades = std::log10(static_cast<double>(Ns.back()) / Ns.front());
    if (decades + 1e-12 < min_decades) {
        std::ostringstream os;
        os << "population sizes span " << decades << " decades; at least " << min_decades << " required";
        throw InvalidArgument(os.str());
    }
    if (reps < 2) throw InvalidArgument("at least 2 replications are required");
}

namespace {

struct MemberStats {
    double cost_dev = 0.0;
    double cost_eq = 0.0;
    double lemma35 = 0.0;
    double lemma36 = 0.0;
    double lemma37 = 0.0;
};

struct RepStats {
    double lemma31 = 0.0;
    double lemma32 = 0.0;
    double lemma33 = 0.0;
    double lemma34 = 0.0;
    std::vector<MemberStats> members;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

RepStats replication_stats(const Model& model, const Equilibrium& eq, const Replication& r,
                           const std::vector<Deviation>& family) {
    const int K = model.K();
    const int n = model.n();
    const long N = r.control.paths();
    RepStats s;
    std::vector<double> per_agent(static_cast<std::size_t>(N));
    for (long a = 0; a < N; ++a) {
        double sup_x = 0.0;
        double sup_e = 0.0;
        for (int k = 0; k <= K; ++k) {
            double nx = 0.0;
            for (int j = 0; j < n; ++j) nx += r.coupled(k, a, j) * r.coupled(k, a, j);
            sup_x = std::max(sup_x, nx);
            sup_e = std::max(sup_e, sq_norm_diff(r.coupled.at(k, a), r.limit.at(k, a), n));
        }
        per_agent[static_cast<std::size_t>(a)] = sup_x;
        s.lemma33 = std::max(s.lemma33, sup_e);
    }
    s.lemma31 = mean_of(per_agent);
    for (int k = 0; k <= K; ++k) s.lemma32 = std::max(s.lemma32, sq_norm_diff(r.average.at(k), eq.z.at(k), n));
    for (long a = 0; a < N; ++a)
        per_agent[static_cast<std::size_t>(a)] = r.coupled_cost[static_cast<std::size_t>(a)] - r.limit_cost[static_cast<std::size_t>(a)];
    s.lemma34 = mean_of(per_agent);

    const double cost_eq = mean_of(r.coupled_cost);
    for (const auto& dev : family) {
        const BatchedDeviation b = deviation_batch(model, eq, r, dev);
        MemberStats ms;
        ms.cost_eq = cost_eq;
        ms.cost_dev = mean_of(b.coupled_cost);
        ms.lemma35 = mean_of(b.sup_average_gap);
        ms.lemma36 = mean_of(b.sup_state_gap);
        for (long a = 0; a < N; ++a)
            per_agent[static_cast<std::size_t>(a)] = b.coupled_cost[static_cast<std::size_t>(a)] - b.limit_cost[static_cast<std::size_t>(a)];
        ms.lemma37 = mean_of(per_agent);
        s.members.push_back(ms);
    }
    return s;
}

} // namespace

RateTable population_rates(const Model& model, const Equilibrium& eq, const RateExperiment& exp) {
    exp.validate();
    RateTable table;
    const std::size_t F = exp.family.size();
    std::vector<std::string> ids;
    for (const auto& d : exp.family) ids.push_back(d.id());

    std::map<std::string, std::vector<double>> estimate;  // metric -> per-N estimate
    bool has_anchor = false;
    for (const auto& d : exp.family) has_anchor = has_anchor || d.is_anchor();

    for (int N : exp.Ns) {
        std::vector<RepStats> stats(static_cast<std::size_t>(exp.reps));
        parallel_chunks(exp.reps, 1, [&](long, long begin, long end) {
            for (long r = begin; r < end; ++r) {
                const Replication rep = simulate_replication(model, eq, N, static_cast<int>(r), exp.seed);
                stats[static_cast<std::size_t>(r)] = replication_stats(model, eq, rep, exp.family);
            }
        });
        double m31 = 0.0, m32 = 0.0, m33 = 0.0, m34 = 0.0;
        std::vector<MemberStats> msum(F);
        for (int r = 0; r < exp.reps; ++r) {
            const RepStats& s = stats[static_cast<std::size_t>(r)];
            table.rows.push_back({N, r, "lemma31", s.lemma31});
            table.rows.push_back({N, r, "lemma32", s.lemma32});
            table.rows.push_back({N, r, "lemma33", s.lemma33});
            table.rows.push_back({N, r, "lemma34", s.lemma34});
            m31 += s.lemma31;
            m32 += s.lemma32;
            m33 += s.lemma33;
            m34 += s.lemma34;
            for (std::size_t f = 0; f < F; ++f) {
                const MemberStats& ms = s.members[f];
                table.rows.push_back({N, r, "lemma35[" + ids[f] + "]", ms.lemma35});
                table.rows.push_back({N, r, "lemma36[" + ids[f] + "]", ms.lemma36});
                table.rows.push_back({N, r, "lemma37[" + ids[f] + "]", ms.lemma37});
                table.nash.push_back({N, r, ids[f], ms.cost_dev, ms.cost_eq, ms.cost_eq - ms.cost_dev});
                msum[f].cost_dev += ms.cost_dev;
                msum[f].cost_eq += ms.cost_eq;
                msum[f].lemma35 += ms.lemma35;
                msum[f].lemma36 += ms.lemma36;
                msum[f].lemma37 += ms.lemma37;
            }
        }
        const double R = exp.reps;
        estimate["lemma31"].push_back(m31 / R);
        estimate["lemma32"].push_back(m32 / R);
        estimate["lemma33"].push_back(m33 / R);
        estimate["lemma34"].push_back(std::abs(m34 / R));
        if (F > 0) {
            double w35 = 0.0, w36 = 0.0, w37 = 0.0, eps = 0.0;
            for (std::size_t f = 0; f < F; ++f) {
                const double e35 = msum[f].lemma35 / R;
                const double e36 = msum[f].lemma36 / R;
                const double e37 = std::abs(msum[f].lemma37 / R);
                estimate["lemma35[" + ids[f] + "]"].push_back(e35);
                estimate["lemma36[" + ids[f] + "]"].push_back(e36);
                estimate["lemma37[" + ids[f] + "]"].push_back(e37);
                w35 = std::max(w35, e35);
                w36 = std::max(w36, e36);
                w37 = std::max(w37, e37);
                eps = std::max(eps, (msum[f].cost_eq - msum[f].cost_dev) / R);
            }
            estimate["lemma35"].push_back(w35);
            estimate["lemma36"].push_back(w36);
            estimate["lemma37"].push_back(w37);
            if (has_anchor) estimate["nash"].push_back(eps);
        }
    }

    auto add = [&](const std::string& metric, double rate) {
        auto it = estimate.find(metric);
        if (it != estimate.end()) table.fits.push_back(fit_loglog(metric, exp.Ns, it->second, rate));
    };
    add("lemma31", 0.0);
    add("lemma32", 1.0);
    add("lemma33", 1.0);
    add("lemma34", 0.5);
    add("lemma35", 1.0);
    add("lemma36", 1.0);
    add("lemma37", 0.5);
    for (const auto& id : ids) {
        add("lemma35[" + id + "]", 1.0);
        add("lemma36[" + id + "]", 1.0);
        add("lemma37[" + id + "]", 0.5);
    }
    add("nash", 0.5);
    return table;
}

namespace {

RateTable filtered(RateTable t, const std::string& metric) {
    RateTable out;
    for (auto& r : t.rows) {
        if (r.metric == metric) out.rows.push_back(std::move(r));
    }
    for (auto& f : t.fits) {
        if (f.metric == metric) out.fits.push_back(std::move(f));
    }
    return out;
}

RateTable lemma_table(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps,
                      std::uint64_t seed, const std::string& metric) {
    RateExperiment exp;
    exp.Ns = Ns;
    exp.reps = reps;
    exp.seed = seed;
    return filtered(population_rates(model, eq, exp), metric);
}

} // namespace

RateTable rate_lemma_3_2(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed) {
    return lemma_table(model, eq, Ns, reps, seed, "lemma32");
}

RateTable rate_lemma_3_3(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed) {
    return lemma_table(model, eq, Ns, reps, seed, "lemma33");
}

RateTable cost_gap_lemma_3_4(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed) {
    return lemma_table(model, eq, Ns, reps, seed, "lemma34");
}

RateTable nash_gap(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns,
                   const std::vector<Deviation>& family, int reps, std::uint64_t seed) {
    bool anchor = false;
    for (const auto& d : family) anchor = anchor || d.is_anchor();
    if (!anchor) throw InvalidArgument("the deviation family must contain the lambda = 1 anchor");
    RateExperiment exp;
    exp.Ns = Ns;
    exp.reps = reps;
    exp.seed = seed;
    exp.family = family;
    exp.min_decades = 0.0;
    RateTable t = population_rates(model, eq, exp);
    RateTable out;
    out.nash = std::move(t.nash);
    for (auto& r : t.rows) {
        if (r.metric.rfind("lemma37", 0) == 0) out.rows.push_back(std::move(r));
    }
    for (auto& f : t.fits) {
        if (f.metric == "nash" || f.metric.rfind("lemma37", 0) == 0) out.fits.push_back(std::move(f));
    }
    return out;
}

} // namespace mfglab
