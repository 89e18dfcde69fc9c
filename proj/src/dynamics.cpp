#include "mfglab/dynamics.hpp"

namespace mfglab {

namespace {

std::vector<double> flatten(const Mat& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
    return out;
}

std::vector<double> flatten(const Vec& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

Dynamics::Dynamics(const Model& model) : n_(model.n()), m_(model.m()), dt_(model.dt()) {
    const auto& c = model.coeffs();
    nodes_.reserve(c.A.size());
    for (std::size_t k = 0; k < c.A.size(); ++k) {
        nodes_.push_back({flatten(c.A[k]), flatten(c.B[k]), flatten(c.F[k]), flatten(c.D[k]),
                          flatten(c.b[k]), flatten(c.sigma[k]), flatten(c.Q[k])});
    }
}

void Dynamics::drift_step(int k, const double* x, const double* u, const double* mean, double* out) const {
    const Node& c = nodes_[static_cast<std::size_t>(k)];
    double buf[16];
    std::vector<double> heap;
    double* nx = buf;
    if (n_ > 16) {
        heap.resize(static_cast<std::size_t>(n_));
        nx = heap.data();
    }
    for (int i = 0; i < n_; ++i) {
        double drift = c.b[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_; ++j) {
            drift += c.A[static_cast<std::size_t>(i * n_ + j)] * x[j] + c.F[static_cast<std::size_t>(i * n_ + j)] * mean[j];
        }
        for (int j = 0; j < m_; ++j) drift += c.B[static_cast<std::size_t>(i * m_ + j)] * u[j];
        nx[i] = x[i] + drift * dt_;
    }
    for (int i = 0; i < n_; ++i) out[i] = nx[i];
}

void Dynamics::diffusion(int k, const double* u, double* out) const {
    const Node& c = nodes_[static_cast<std::size_t>(k)];
    for (int i = 0; i < n_; ++i) {
        double vol = c.sigma[static_cast<std::size_t>(i)];
        for (int j = 0; j < m_; ++j) vol += c.D[static_cast<std::size_t>(i * m_ + j)] * u[j];
        out[i] = vol;
    }
}

void Dynamics::step(int k, const double* x, const double* u, const double* mean, double dw,
                    double* out) const {
    const Node& c = nodes_[static_cast<std::size_t>(k)];
    double buf[16];
    std::vector<double> heap;
    double* nx = buf;
    if (n_ > 16) {
        heap.resize(static_cast<std::size_t>(n_));
        nx = heap.data();
    }
    for (int i = 0; i < n_; ++i) {
        double drift = c.b[static_cast<std::size_t>(i)];
        double vol = c.sigma[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_; ++j) {
            drift += c.A[static_cast<std::size_t>(i * n_ + j)] * x[j] + c.F[static_cast<std::size_t>(i * n_ + j)] * mean[j];
        }
        for (int j = 0; j < m_; ++j) {
            drift += c.B[static_cast<std::size_t>(i * m_ + j)] * u[j];
            vol += c.D[static_cast<std::size_t>(i * m_ + j)] * u[j];
        }
        nx[i] = x[i] + drift * dt_ + vol * dw;
    }
    for (int i = 0; i < n_; ++i) out[i] = nx[i];
}

void Dynamics::adjoint_step(int k, const double* y, const double* x, const double* z, double* out) const {
    const Node& c = nodes_[static_cast<std::size_t>(k)];
    double buf[16];
    std::vector<double> heap;
    double* np = buf;
    if (n_ > 16) {
        heap.resize(static_cast<std::size_t>(n_));
        np = heap.data();
    }
    for (int i = 0; i < n_; ++i) {
        double drift = 0.0;
        for (int j = 0; j < n_; ++j) {
            drift += c.A[static_cast<std::size_t>(j * n_ + i)] * y[j] -
                     c.Q[static_cast<std::size_t>(i * n_ + j)] * (x[j] - z[j]);
        }
        np[i] = y[i] + dt_ * drift;
    }
    for (int i = 0; i < n_; ++i) out[i] = np[i];
}

} // namespace mfglab
