#pragma once

#include "mfglab/fbsde.hpp"

#include <vector>

namespace mfglab {

struct FixedPointConfig {
    double rho = 0.5;
    /// Outer stopping tolerance; a nonpositive value selects 1e-4 (1 + |x0|).
    double tol_z = 0.0;
    int max_outer = 100;
    PicardConfig inner;
    /// Start each inner solve from the previous outer iteration's control.
    bool warm_start = true;

    void validate() const;
    double resolved_tol(const Model& model) const;
};

struct OuterRecord {
    int iteration = 0;
    double residual = 0.0;  // max_k |z^{r+1}_k - z^r_k|
    int inner_iterations = 0;
    bool inner_converged = false;
};

enum class FixedPointStatus { Converged, OuterNotConverged, InnerNotConverged };

struct FixedPointResult {
    /// The mean path the returned solution was computed at.
    MeanPath z;
    FBSDESolution sol;
    std::vector<OuterRecord> diagnostics;
    FixedPointStatus status = FixedPointStatus::OuterNotConverged;
    /// max_k |z_k - sample mean of x_k|
    double consistency_residual = 0.0;

    bool converged() const { return status == FixedPointStatus::Converged; }
};

/// Sample mean over paths at each node, reduced in a fixed chunk order.
MeanPath sample_mean(const PathArray& x);

/// Per-node sample standard error of the path mean.
MeanPath sample_stderr(const PathArray& x);

/// Euler solution of dz/dt = (A + F) z + B P_gamma[0] + b, z_0 = x0.
MeanPath initial_mean_guess(const Model& model);

/// Damped outer iteration z <- (1 - rho) z + rho mean(x[z]) with common
/// random numbers. Never throws on non-convergence; inspect `status`.
FixedPointResult fixed_point_iterate(const Model& model, const FixedPointConfig& config, const NoiseBank& noise);

/// As fixed_point_iterate, but throws NotConverged (inner) or
/// OuterNotConverged (with the residual history) on failure.
FixedPointResult fixed_point_solve(const Model& model, const FixedPointConfig& config, const NoiseBank& noise);

/// Integrates dm/dt = (A + F) m + B mean(u) + b by Euler from x0 and
/// returns max_k |m_k - z_k|.
double mean_ode_check(const Model& model, const MeanPath& z, const FBSDESolution& sol);

} // namespace mfglab
