#pragma once

#include "mfglab/convex_sets.hpp"
#include "mfglab/linalg.hpp"
#include "mfglab/paths.hpp"

#include <string>
#include <vector>

namespace mfglab {

/// Uniform grid t_k = k T / K, k = 0..K.
struct TimeGrid {
    double T = 1.0;
    int K = 100;

    double dt() const { return T / K; }
    double t(int k) const { return k * dt(); }
    int nodes() const { return K + 1; }
};

/// Coefficient paths, piecewise constant on the grid: entry k applies on
/// [t_k, t_{k+1}). Every vector has K + 1 entries.
struct Coefficients {
    std::vector<Mat> A;  // n x n
    std::vector<Mat> F;  // n x n
    std::vector<Mat> B;  // n x m
    std::vector<Mat> D;  // n x m
    std::vector<Vec> b;  // n
    std::vector<Vec> sigma;  // n
    std::vector<Mat> Q;  // n x n
    std::vector<Mat> R;  // m x m
    Mat G;               // n x n

    /// Time-constant coefficients broadcast to K + 1 nodes.
    static Coefficients constant(int K, const Mat& A, const Mat& F, const Mat& B, const Mat& D,
                                 const Vec& b, const Vec& sigma, const Mat& Q, const Mat& R,
                                 const Mat& G);
};

struct ModelSpec {
    int n = 1;
    int m = 1;
    Vec x0;
    TimeGrid grid;
    Coefficients coeffs;
    ConvexSet gamma = ConvexSet::full(1);
    /// Positive-definiteness floor for R.
    double r_min = 1e-8;
};

struct Violation {
    std::string assumption;  // "H1", "H2" or "shape"
    int node;                // -1 when not tied to a node
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Checks shapes, (H1) boundedness (and A, F symmetry when `strict_h1`) and
/// (H2) definiteness of Q, R, G.
ValidationReport validate(const ModelSpec& spec, bool strict_h1 = true);

class ValidationFailed : public InvalidArgument {
public:
    explicit ValidationFailed(ValidationReport report)
        : InvalidArgument(report.to_string()), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// A validated, immutable problem instance with per-node caches for the
/// control map.
class Model {
public:
    explicit Model(ModelSpec spec, bool strict_h1 = true);

    const ModelSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }
    int m() const { return spec_.m; }
    int K() const { return spec_.grid.K; }
    double dt() const { return spec_.grid.dt(); }
    const TimeGrid& grid() const { return spec_.grid; }
    const Coefficients& coeffs() const { return spec_.coeffs; }
    const ConvexSet& gamma() const { return spec_.gamma; }
    const Vec& x0() const { return spec_.x0; }
    bool strict_h1() const { return strict_h1_; }

    /// Weighted projection onto gamma under R(t_k).
    const WeightedProjector& projector(int k) const { return projectors_[k]; }
    Vec project_control(int k, const Vec& a) const { return projectors_[k](a); }

    /// phi(t_k, p, q) = P_gamma[R^{-1}(B^T p + D^T q)] in the R(t_k) norm.
    Vec control_map(int k, const Vec& p, const Vec& q) const;

    /// Allocation-free variant on raw arrays of length n, n and m. `scale`
    /// multiplies the unconstrained argument before projection.
    void control_map(int k, const double* p, const double* q, double* u, double scale = 1.0) const;

    /// R(t_k)^{-1}(B^T p + D^T q) without projection.
    void unconstrained_control(int k, const double* p, const double* q, double* a) const;

private:
    ModelSpec spec_;
    bool strict_h1_;
    std::vector<WeightedProjector> projectors_;
    std::vector<Mat> rinv_bt_;  // m x n, row-major copies below
    std::vector<Mat> rinv_dt_;
    std::vector<std::vector<double>> rinv_bt_flat_;
    std::vector<std::vector<double>> rinv_dt_flat_;
};

/// H = <p, Ax + Bu + Fz + b> + <q, Du + sigma> - 1/2 <Q(x - z), x - z> - 1/2 <Ru, u>
/// at node k. Throws ControlNotFeasible if u is outside gamma.
double hamiltonian(const Model& model, int k, const Vec& p, const Vec& q, const Vec& x,
                   const Vec& u, const Vec& z);

/// v^T W v on a raw array of length W.rows().
double quad_form(const Mat& w, const double* v);

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Per-path tracking cost
///   1/2 [ sum_k (<Q(x_k - y_k), x_k - y_k> + <R u_k, u_k>) dt + <G(x_K - y_K), x_K - y_K> ]
/// with left-endpoint quadrature. `target` has either one path (a shared
/// deterministic target) or as many paths as `x`.
std::vector<double> tracking_cost_per_path(const Model& model, const PathArray& x,
                                           const PathArray& target, const PathArray& u);

/// Limiting cost J(u) against the frozen mean z.
std::vector<double> limit_cost_per_path(const Model& model, const MeanPath& z, const PathArray& x,
                                        const PathArray& u);
CostEstimate limit_cost_estimate(const Model& model, const MeanPath& z, const PathArray& x,
                                 const PathArray& u);
double limit_cost(const Model& model, const MeanPath& z, const PathArray& x, const PathArray& u);

CostEstimate mean_and_stderr(const std::vector<double>& values);

/// Copies a mean path into a single-path PathArray.
PathArray as_single_path(const MeanPath& z);

} // namespace mfglab
