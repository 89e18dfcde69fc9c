#include "mfglab/population.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace mfglab;
using namespace mfglab::testing;

namespace {

Scalar base_instance() {
    Scalar s;
    s.A = 0.2;
    s.D = 0.2;
    s.F = 0.5;
    s.b = 0.1;
    s.sigma = 0.4;
    s.G = 0.5;
    s.x0 = 0.5;
    s.K = 20;
    s.gamma = ConvexSet::interval(-0.3, 0.6);
    return s;
}

/// Equilibrium of the base instance, solved once.
const Equilibrium& base_equilibrium() {
    static const Equilibrium eq = [] {
        const Model m = base_instance().model();
        FixedPointConfig c;
        c.inner.paths = 3000;
        return Equilibrium::from(fixed_point_solve(m, c, NoiseBank::generate(1, 3000, m.K(), m.dt())));
    }();
    return eq;
}

struct Stat {
    double mean = 0, se = 0;
};

Stat metric_stat(const RateTable& t, const std::string& metric, int N) {
    std::vector<double> v;
    for (const auto& r : t.rows)
        if (r.metric == metric && r.N == N) v.push_back(r.value);
    const CostEstimate e = mean_and_stderr(v);
    return {e.mean, e.std_error};
}

} // namespace

TEST_CASE("without interaction the coupled and limit states coincide") {
    Scalar s = base_instance();
    s.F = 0.0;
    const Model m = s.model();
    for (int N : {1, 7}) {
        const Replication r = simulate_replication(m, base_equilibrium(), N, 0, 3);
        CHECK(r.coupled == r.limit);
    }
}

TEST_CASE("average of free brownian agents") {
    Scalar s;
    s.B = 0;
    s.sigma = 1.0;
    s.x0 = 0.3;
    s.K = 20;
    s.gamma = ConvexSet::singleton(Vec::Zero(1));
    const Model m = s.model();
    const int N = 10, reps = 2000;
    const PopulationRun run = simulate_population(m, base_equilibrium(), N, reps, 7);
    std::vector<double> end;
    for (const auto& r : run.reps) end.push_back(r.average(m.K(), 0));
    const CostEstimate e = mean_and_stderr(end);
    CHECK(std::abs(e.mean - 0.3) <= 4.0 * e.std_error);
    double var = 0.0;
    for (double v : end) var += (v - e.mean) * (v - e.mean);
    var /= reps - 1;
    CHECK(std::abs(var - 1.0 / N) <= 4.0 * std::sqrt(2.0 / reps) / N);
}

TEST_CASE("averaged recursion conserves the population mean") {
    const Model m = base_instance().model();
    const Replication r = simulate_replication(m, base_equilibrium(), 25, 2, 11);
    const MeanPath avg = averaged_recursion(m, r.control, r.dw);
    CHECK(MeanPath::max_abs_diff(avg, r.average) <= 1e-12);
}

TEST_CASE("agent noise does not depend on the population size") {
    const Model m = base_instance().model();
    const Replication a = simulate_replication(m, base_equilibrium(), 10, 4, 5);
    const Replication b = simulate_replication(m, base_equilibrium(), 30, 4, 5);
    for (int i = 0; i < 10; ++i) {
        for (int k = 0; k <= m.K(); ++k) CHECK(a.limit(k, i, 0) == b.limit(k, i, 0));
        CHECK(a.limit_cost[i] == b.limit_cost[i]);
    }
}

TEST_CASE("the anchor deviation reproduces the equilibrium") {
    const Model m = base_instance().model();
    const Replication r = simulate_replication(m, base_equilibrium(), 12, 1, 9);
    const BatchedDeviation batch = deviation_batch(m, base_equilibrium(), r, Deviation::scaled(1.0));
    for (int i : {0, 5, 11}) {
        const DeviationRun d = deviation_run(m, base_equilibrium(), r, i, Deviation::scaled(1.0));
        CHECK(d.coupled_cost == r.coupled_cost[i]);
        CHECK(d.eq_coupled_cost == r.coupled_cost[i]);
        CHECK(d.coupled == r.coupled);
        CHECK(batch.coupled_cost[i] == r.coupled_cost[i]);
        CHECK(batch.sup_state_gap[i] == d.sup_state_gap);
    }
}

TEST_CASE("batched deviations agree with direct simulation") {
    const Model m = base_instance().model();
    const Replication r = simulate_replication(m, base_equilibrium(), 9, 0, 13);
    for (const Deviation& dev : default_deviation_family(1)) {
        const BatchedDeviation batch = deviation_batch(m, base_equilibrium(), r, dev);
        for (int i : {0, 4, 8}) {
            const DeviationRun d = deviation_run(m, base_equilibrium(), r, i, dev);
            CHECK(batch.coupled_cost[i] == doctest::Approx(d.coupled_cost).epsilon(1e-10));
            CHECK(batch.limit_cost[i] == doctest::Approx(d.limit_cost).epsilon(1e-10));
            CHECK(std::abs(batch.sup_average_gap[i] - d.sup_average_gap) <= 1e-12);
            CHECK(std::abs(batch.sup_state_gap[i] - d.sup_state_gap) <= 1e-12);
        }
    }
}

TEST_CASE("deviations without interaction leave the state gap at zero") {
    Scalar s = base_instance();
    s.F = 0.0;
    const Model m = s.model();
    const Replication r = simulate_replication(m, base_equilibrium(), 6, 0, 1);
    for (const Deviation& dev : default_deviation_family(1)) {
        CHECK(deviation_run(m, base_equilibrium(), r, 2, dev).sup_state_gap == 0.0);
    }
}

TEST_CASE("deviation controls are admissible") {
    const Model m = base_instance().model();
    const Replication r = simulate_replication(m, base_equilibrium(), 5, 0, 2);
    for (const Deviation& dev : default_deviation_family(1)) {
        const PathArray u = deviation_control(m, base_equilibrium(), r, 1, dev);
        double energy = 0.0;
        for (double v : u.raw()) {
            CHECK(v >= -0.3 - 1e-12);
            CHECK(v <= 0.6 + 1e-12);
            energy += v * v * m.dt();
        }
        CHECK(energy <= 0.36 * m.grid().T + 1e-12);
    }
}

TEST_CASE("deviation family") {
    const auto fam = default_deviation_family(1);
    std::vector<std::string> ids;
    for (const auto& d : fam) ids.push_back(d.id());
    CHECK(ids == std::vector<std::string>{"const(0)", "lambda=0", "lambda=0.5", "lambda=1", "lambda=1.5", "reversed"});
    CHECK(Deviation::scaled(1.0).is_anchor());
    CHECK(!Deviation::scaled(0.98).is_anchor());
}

TEST_CASE("log-log fit") {
    const std::vector<int> Ns{10, 100, 1000};
    const Fit f = fit_loglog("x", Ns, {0.3, 0.03, 0.003}, 1.0);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(f.stderr_slope == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(f.c_bound == doctest::Approx(3.0));
    const Fit g = fit_loglog("y", Ns, {0.0, 0.1, -1.0}, 0.5);
    CHECK(g.points == 1);
    CHECK(std::isnan(g.slope));
}

TEST_CASE("gap metrics vanish in degenerate cases") {
    Scalar s = base_instance();
    s.F = 0.0;
    const std::vector<int> Ns{4, 10, 30, 130};
    {
        const Model m = s.model();
        const RateTable t = rate_lemma_3_3(m, base_equilibrium(), Ns, 4, 1);
        REQUIRE(!t.rows.empty());
        for (const auto& r : t.rows) CHECK(r.value == 0.0);
    }
    s.Q = 0;
    s.G = 0;
    const Model m = s.model();
    const RateTable t = cost_gap_lemma_3_4(m, base_equilibrium(), Ns, 4, 1);
    REQUIRE(!t.rows.empty());
    for (const auto& r : t.rows) CHECK(r.value == 0.0);
}

TEST_CASE("average deviation of free brownian agents scales as 1/N") {
    Scalar s;
    s.B = 0;
    s.sigma = 1.0;
    s.K = 20;
    s.gamma = ConvexSet::singleton(Vec::Zero(1));
    const Model m = s.model();
    Equilibrium eq = base_equilibrium();
    eq.z = MeanPath(m.K() + 1, 1, 1.0);
    const std::vector<int> Ns{10, 30, 100, 320};
    const RateTable t = rate_lemma_3_2(m, eq, Ns, 64, 3);
    for (int N : Ns) {
        const Stat st = metric_stat(t, "lemma32", N);
        // E sup_t |B_t|^2 over [0, 1] lies in [E B_1^2, 4] (Doob).
        CHECK(N * st.mean >= 1.0 - 4.0 * N * st.se);
        CHECK(N * st.mean <= 4.0);
    }
    CHECK(t.fit("lemma32").slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("population rates on a small instance") {
    const Model m = base_instance().model();
    RateExperiment ex;
    ex.Ns = {10, 30, 100, 320};
    ex.reps = 64;
    ex.family = default_deviation_family(1);
    const RateTable t = population_rates(m, base_equilibrium(), ex);
    CHECK(std::abs(t.fit("lemma31").slope) <= 0.1);
    for (const char* metric : {"lemma32", "lemma33", "lemma35", "lemma36"})
        CHECK(t.fit(metric).slope == doctest::Approx(-1.0).epsilon(0.2));
    CHECK(t.fit("lemma37").slope <= -0.4);
    CHECK(t.fit("lemma34").slope <= -0.4);
    const double ratio = metric_stat(t, "lemma33", 100).mean / metric_stat(t, "lemma33", 10).mean;
    CHECK(ratio >= 0.05);
    CHECK(ratio <= 0.2);

    // Doubling the replications shrinks the standard error by about 1/sqrt 2.
    ex.reps = 128;
    const RateTable t2 = population_rates(m, base_equilibrium(), ex);
    const double se_ratio = metric_stat(t2, "lemma32", 30).se / metric_stat(t, "lemma32", 30).se;
    CHECK(se_ratio >= 0.6);
    CHECK(se_ratio <= 0.85);

    // Exchangeability of agents.
    const PopulationRun run = simulate_population(m, base_equilibrium(), 20, 64, 3);
    std::vector<double> first, second;
    for (const auto& r : run.reps) {
        for (int i = 0; i < 10; ++i) first.push_back(r.coupled_cost[i]);
        for (int i = 10; i < 20; ++i) second.push_back(r.coupled_cost[i]);
    }
    const CostEstimate a = mean_and_stderr(first), b = mean_and_stderr(second);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("nash gap requires the anchor and stays nonnegative") {
    const Model m = base_instance().model();
    const std::vector<int> Ns{10, 20, 40, 80};
    CHECK_THROWS_AS(nash_gap(m, base_equilibrium(), Ns, {Deviation::scaled(0.5)}, 4, 1), InvalidArgument);
    const RateTable t = nash_gap(m, base_equilibrium(), Ns, default_deviation_family(1), 4, 1);
    for (const auto& r : t.nash) {
        if (r.deviation_id == "lambda=1") CHECK(r.gap == 0.0);
    }
    for (double v : t.fit("nash").values) CHECK(v >= 0.0);
}

TEST_CASE("rate experiments validate their inputs") {
    RateExperiment ex;
    ex.Ns = {10, 20, 30, 40};
    CHECK_THROWS_AS(ex.validate(), InvalidArgument);
    ex.Ns = {10, 100, 1000};
    CHECK_THROWS_AS(ex.validate(), InvalidArgument);
    ex.Ns = {10, 30, 100, 1000};
    ex.reps = 1;
    CHECK_THROWS_AS(ex.validate(), InvalidArgument);
}
