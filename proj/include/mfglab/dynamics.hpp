#pragma once

#include "mfglab/model.hpp"

#include <vector>

namespace mfglab {

/// Row-major copies of the coefficients for allocation-free Euler steps.
class Dynamics {
public:
    explicit Dynamics(const Model& model);

    int n() const { return n_; }
    int m() const { return m_; }
    double dt() const { return dt_; }

    /// out = x + (A x + B u + F mean + b) dt + (D u + sigma) dw at node k.
    /// `out` may alias `x`.
    void step(int k, const double* x, const double* u, const double* mean, double dw,
              double* out) const;

    /// Drift part only: out = x + (A x + B u + F mean + b) dt.
    void drift_step(int k, const double* x, const double* u, const double* mean, double* out) const;

    /// Diffusion coefficient D u + sigma.
    void diffusion(int k, const double* u, double* out) const;

    /// out = y + dt (A^T y - Q (x - z)): the explicit adjoint drift step.
    void adjoint_step(int k, const double* y, const double* x, const double* z, double* out) const;

private:
    struct Node {
        std::vector<double> A, B, F, D, b, sigma, Q;
    };
    int n_;
    int m_;
    double dt_;
    std::vector<Node> nodes_;
};

} // namespace mfglab
