#pragma once

#include "mfglab/model.hpp"

#include <vector>

namespace mfglab {

/// Affine representation of the unconstrained frozen-mean problem:
///   V(t, x) = 1/2 x^T P x + s^T x + r,   p = -(P x + s),
///   u*(t, x) = -K_fb x - k_ff,           q = -P (D u* + sigma).
struct RiccatiSolution {
    std::vector<Mat> P;     // n x n per node
    std::vector<Vec> s;     // n per node
    std::vector<double> r;  // value offset per node
    std::vector<Mat> K_fb;  // m x n per node
    std::vector<Vec> k_ff;  // m per node

    Vec control(int k, const Vec& x) const { return -(K_fb[k] * x) - k_ff[k]; }
    Vec adjoint_p(int k, const Vec& x) const { return -(P[k] * x + s[k]); }
    double value(int k, const Vec& x) const { return 0.5 * x.dot(P[k] * x) + s[k].dot(x) + r[k]; }
};

/// Backward RK4 (four substeps per grid step) for
///   -dP/dt = A^T P + P A - P B S^{-1} B^T P + Q,           P(T) = G,
///    ds/dt = P B S^{-1} (B^T s + D^T P sigma) - P F z - P b - A^T s + Q z,  s(T) = -G z(T),
///   -dr/dt = 1/2 z^T Q z + s^T (F z + b) + 1/2 sigma^T P sigma - 1/2 k^T S k, r(T) = 1/2 z^T G z,
/// with S = R + D^T P D and k = S^{-1}(B^T s + D^T P sigma). Coefficients are
/// held at their left-node values on each step; z is linear between nodes.
/// Requires gamma = FullSpace. Throws SingularInnerMatrix if S loses
/// positive definiteness.
RiccatiSolution solve_riccati(const Model& model, const MeanPath& z);

/// Mean of the state under the Riccati feedback for frozen z, integrated
/// with the same RK4 substeps: dm/dt = (A - B K_fb) m - B k_ff + F z + b.
MeanPath riccati_mean(const Model& model, const RiccatiSolution& sol, const MeanPath& z);

/// Consistency fixed point z = riccati_mean(z) for the unconstrained game.
MeanPath riccati_mean_fixed_point(const Model& model, double tol = 1e-12, int max_iter = 10000);

struct DPLattice {
    double lower = -1.0;
    double upper = 1.0;
    int points = 801;
    int quadrature_order = 7;
    /// Largest tolerated fraction of probability mass leaving the lattice in one step.
    double max_exit_fraction = 1e-3;
};

/// Lattice covering x0 and the mean path +- 6 standard deviations of the
/// uncontrolled state.
DPLattice default_lattice(const Model& model, const MeanPath& z, int points = 801);

struct DPValueTable {
    double lower = 0.0;
    double upper = 0.0;
    int points = 0;
    std::vector<std::vector<double>> value;   // (K+1) x J
    std::vector<std::vector<double>> policy;  // K x J
    /// Per-node curvature c_k removed before interpolating: V - 1/2 c_k x^2
    /// is interpolated linearly, the quadratic is added back exactly.
    std::vector<double> curvature;
    /// Largest one-step exit fraction seen when propagating the optimal
    /// policy's law from x0.
    double max_exit_fraction = 0.0;

    double spacing() const { return (upper - lower) / (points - 1); }
    double x(int j) const { return lower + j * spacing(); }
    /// Piecewise-linear interpolation of V - 1/2 c_k x^2 (boundary segments
    /// extended linearly) plus 1/2 c_k x^2.
    double value_at(int k, double x) const;
    double policy_at(int k, double x) const;
};

/// Backward dynamic programming for n = m = 1 with Gauss-Hermite expectations
/// and golden-section minimization over the feasible control interval.
DPValueTable solve_dp_1d(const Model& model, const MeanPath& z, const DPLattice& lattice);

/// Probabilists' Gauss-Hermite rule: E f(xi) ~ sum w_i f(x_i), xi ~ N(0, 1).
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Quadrature gauss_hermite(int order);

} // namespace mfglab
