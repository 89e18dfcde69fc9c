#pragma once

#include "mfglab/model.hpp"
#include "mfglab/noise.hpp"
#include "mfglab/regression.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace mfglab {

/// Forward paths: x is (K+1) x M x n, u is K x M x m.
struct PathEnsemble {
    PathArray x;
    PathArray u;
    std::uint64_t noise_seed = 0;
};

/// Feedback policy u_k = policy(k, x_k); writes m entries into u.
using FeedbackPolicy = std::function<void(int k, const double* x, double* u)>;

/// Euler-Maruyama with explicit controls:
/// x_{k+1} = x_k + (A x_k + B u_k + F z_k + b) dt + (D u_k + sigma) dW_k.
PathEnsemble simulate_forward(const Model& model, const MeanPath& z, const PathArray& u,
                              const NoiseBank& noise);
PathEnsemble simulate_forward(const Model& model, const MeanPath& z, const FeedbackPolicy& policy,
                              const NoiseBank& noise);

/// Per-node regression representation of the adjoint: p_k(x) and q_k(x) as
/// polynomials in the standardized state.
class AdjointPolicy {
public:
    struct Node {
        Standardization norm;
        Mat coef_p;  // L x n
        Mat coef_q;  // L x n, zero at the terminal node
    };

    AdjointPolicy() = default;
    AdjointPolicy(int n, int degree, std::vector<Node> nodes);

    int degree() const { return basis_->degree(); }
    int nodes() const { return static_cast<int>(nodes_.size()); }
    const MonomialBasis& basis() const { return *basis_; }
    const Node& node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }

    void adjoint(int k, const double* x, double* p, double* q) const;

    /// phi(t_k, p_k(x), q_k(x)) scaled by `scale` before projection.
    void control(const Model& model, int k, const double* x, double* u, double scale = 1.0) const;

private:
    std::shared_ptr<const MonomialBasis> basis_;
    std::vector<Node> nodes_;
};

struct BackwardSolution {
    PathArray p;  // (K+1) x M x n
    PathArray q;  // K x M x n
    AdjointPolicy policy;
    std::vector<double> residual_p;  // rms of p_{k+1} - E[p_{k+1} | x_k] per node
    int rank_deficient_nodes = 0;
};

/// Ridge added to the normalized regression normal equations.
inline constexpr double kRegressionRidge = 1e-10;

/// Explicit backward Euler for the adjoint with least-squares conditional
/// expectations:
///   p_K = -G (x_K - z_K),
///   q_k = E[(p_{k+1} - E[p_{k+1} | x_k]) dW_k | x_k] / dt,
///   p_k = E[p_{k+1} | x_k] + dt (A^T E[p_{k+1} | x_k] - Q (x_k - z_k)).
BackwardSolution backward_pass(const Model& model, const MeanPath& z, const PathEnsemble& ensemble,
                               const NoiseBank& noise, int degree);

struct PicardConfig {
    double theta = 0.5;
    double tol_u = 1e-5;
    int max_iter = 200;
    int degree = 3;
    long paths = 50000;

    void validate() const;
};

struct FBSDESolution {
    PathEnsemble ensemble;
    BackwardSolution backward;
    /// (sum_k E|u^{j+1} - u^j|^2 dt)^{1/2} per iteration.
    std::vector<double> log;
    bool converged = false;
    long noise_paths = 0;
    int noise_steps = 0;

    int iterations() const { return static_cast<int>(log.size()); }
    /// Throws NotConverged with the iteration log unless converged.
    void require_converged() const;
};

/// The feasible control nearest zero at every node, broadcast to all paths.
PathArray nearest_feasible_to_zero(const Model& model, long paths);

/// Damped Picard iteration on the frozen-mean Hamiltonian system with
/// common random numbers. Starts from `initial` when given, otherwise from
/// nearest_feasible_to_zero.
FBSDESolution picard_solve_frozen(const Model& model, const MeanPath& z, const PicardConfig& config,
                                  const NoiseBank& noise, const PathArray* initial = nullptr);

/// E int <phi_A - phi_B, B^T (p_A - p_B) + D^T (q_A - q_B)> dt; nonnegative
/// up to round-off because the weighted projection is monotone.
double monotonicity_diagnostic(const Model& model, const FBSDESolution& a, const FBSDESolution& b);

/// (sum_k E|u_a - u_b|^2 dt)^{1/2} over matching control paths.
double control_l2_distance(const PathArray& a, const PathArray& b, double dt);

} // namespace mfglab
