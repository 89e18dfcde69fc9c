#pragma once

#include "mfglab/mean_field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfglab {

/// What the population experiments need from a solved mean-field game.
struct Equilibrium {
    MeanPath z;             // (K+1) x n frozen mean
    AdjointPolicy policy;   // regression feedback p_k(x), q_k(x)
    MeanPath mean_control;  // K x m sample mean of the solved controls

    static Equilibrium from(const FixedPointResult& res);
};

/// One replication of the N-agent system under the decentralized strategies.
struct Replication {
    PathArray dw;        // K x N x 1
    PathArray coupled;   // (K+1) x N x n, drift F x^(N)
    PathArray limit;     // (K+1) x N x n, drift F z
    PathArray control;   // K x N x m, u_i = phi(p(alpha_i), q(alpha_i))
    MeanPath average;    // (K+1) x n, mean of the coupled states
    std::vector<double> coupled_cost;  // per agent, against the population average
    std::vector<double> limit_cost;    // per agent, against z
};

struct PopulationRun {
    int N = 0;
    std::uint64_t seed = 0;
    std::vector<Replication> reps;
};

/// Brownian increments of agent `agent` in replication `rep`; independent of N.
void agent_increments(std::uint64_t seed, int rep, int agent, int steps, double dt, double* out);

Replication simulate_replication(const Model& model, const Equilibrium& eq, int N, int rep, std::uint64_t seed);
PopulationRun simulate_population(const Model& model, const Equilibrium& eq, int N, int reps, std::uint64_t seed);

/// Euler steps of the coupled system for given controls: every agent uses
/// drift F times the current average. Writes states and the average.
void step_coupled(const Model& model, const PathArray& control, const PathArray& dw, PathArray& x, MeanPath& average);

/// The averaged recursion x^(N)_{k+1} = x^(N)_k + ((A + F) x^(N)_k + B mean(u_k) + b) dt
///   + mean((D u_k + sigma) dW_k).
MeanPath averaged_recursion(const Model& model, const PathArray& control, const PathArray& dw);

struct Deviation {
    enum class Kind { Constant, Scaled, Reversed };
    Kind kind = Kind::Scaled;
    Vec c;              // Constant: u = P_gamma[c]
    double lambda = 1;  // Scaled: u = P_gamma[lambda R^{-1}(B^T p + D^T q)]

    std::string id() const;
    bool is_anchor() const { return kind == Kind::Scaled && lambda == 1.0; }

    static Deviation constant(Vec c);
    static Deviation scaled(double lambda);
    static Deviation reversed();
};

/// Constant members for each c, scaled members for each lambda, and the
/// time-reversed mean equilibrium control when `reversed` is set.
std::vector<Deviation> deviation_family(const std::vector<Vec>& constants, const std::vector<double>& lambdas,
                                        bool reversed);
/// constants {0}, lambdas {0, 0.5, 1, 1.5}, reversed.
std::vector<Deviation> default_deviation_family(int m);

/// Deviating control path (K x m) for agent `agent` of a replication.
/// Throws InfeasibleDeviation if any value leaves gamma.
PathArray deviation_control(const Model& model, const Equilibrium& eq, const Replication& rep, int agent,
                            const Deviation& dev);

struct DeviationRun {
    int agent = 0;
    PathArray u;               // K x 1 x m
    PathArray coupled;         // (K+1) x N x n, y of the perturbed system
    MeanPath average;          // y^(N)
    PathArray limit;           // (K+1) x 1 x n, the perturbed limit state
    double coupled_cost = 0;   // cost of agent i in the N-agent game
    double limit_cost = 0;     // cost of agent i against z
    double eq_coupled_cost = 0;
    double sup_average_gap = 0;  // sup_t |y^(N) - z|^2
    double sup_state_gap = 0;    // sup_t |y^i - ybar^i|^2
};

/// Simulates the perturbed N-agent system directly for one deviating agent.
DeviationRun deviation_run(const Model& model, const Equilibrium& eq, const Replication& rep, int agent,
                           const Deviation& dev);

/// The same quantities for every agent deviating in turn, by linear
/// superposition on the equilibrium replication. Vectors are indexed by agent.
struct BatchedDeviation {
    std::vector<double> coupled_cost;
    std::vector<double> limit_cost;
    std::vector<double> sup_average_gap;
    std::vector<double> sup_state_gap;
};
BatchedDeviation deviation_batch(const Model& model, const Equilibrium& eq, const Replication& rep,
                                 const Deviation& dev);

struct RateRow {
    int N;
    int rep;
    std::string metric;
    double value;
};

struct NashRow {
    int N;
    int rep;
    std::string deviation_id;
    double cost_dev;
    double cost_eq;
    double gap;  // cost_eq - cost_dev
};

/// Ordinary least squares of log(value) on log(N) over the positive values.
struct Fit {
    std::string metric;
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    /// Smallest C with value <= C N^{-rate} on every row.
    double c_bound = 0.0;
    int points = 0;
    std::vector<int> Ns;
    std::vector<double> values;  // the per-N estimates that were fitted
};

Fit fit_loglog(const std::string& metric, const std::vector<int>& Ns, const std::vector<double>& values, double rate);

struct RateTable {
    std::vector<RateRow> rows;
    std::vector<NashRow> nash;
    std::vector<Fit> fits;

    const Fit& fit(const std::string& metric) const;
    bool has_fit(const std::string& metric) const;
};

struct RateExperiment {
    std::vector<int> Ns{10, 25, 50, 100, 200, 400, 1000};
    int reps = 64;
    std::uint64_t seed = 1;
    std::vector<Deviation> family;
    /// Require the Ns to span at least this many decades.
    double min_decades = 1.5;

    void validate() const;
};

/// Per-replication rows and per-N fits for the metrics
///   lemma31  mean_i sup_t |x_i|^2                          (bounded)
///   lemma32  sup_t |x^(N) - z|^2                           (1/N)
///   lemma33  max_i sup_t |x_i - alpha_i|^2                 (1/N)
///   lemma34  mean_i (coupled cost - limit cost), fitted as |mean|  (1/sqrt N)
/// and, for each family member, lemma35, lemma36 (1/N) and lemma37 (1/sqrt N),
/// averaged over all agents deviating in turn. Summary fits lemma35,
/// lemma36, lemma37 take the worst member at each N.
RateTable population_rates(const Model& model, const Equilibrium& eq, const RateExperiment& exp);

RateTable rate_lemma_3_2(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed);
RateTable rate_lemma_3_3(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed);
RateTable cost_gap_lemma_3_4(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns, int reps, std::uint64_t seed);

/// epsilon(N) = max(0, max over the family of mean_rep(cost_eq - cost_dev)),
/// with costs averaged over all agents deviating in turn. Requires the
/// lambda = 1 anchor in the family. Fit "nash" covers the positive part.
RateTable nash_gap(const Model& model, const Equilibrium& eq, const std::vector<int>& Ns,
                   const std::vector<Deviation>& family, int reps, std::uint64_t seed);

} // namespace mfglab
