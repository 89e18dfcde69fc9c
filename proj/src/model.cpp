#include "mfglab/model.hpp"

#include "mfglab/errors.hpp"

#include <cmath>
#include <sstream>

namespace mfglab {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;

void add(ValidationReport& r, std::string assumption, int node, std::string msg) {
    r.violations.push_back({std::move(assumption), node, std::move(msg)});
}

bool check_shape(ValidationReport& r, const char* name, const std::vector<Mat>& series, int nodes,
                 int rows, int cols) {
    if (static_cast<int>(series.size()) != nodes) {
        std::ostringstream os;
        os << name << " has " << series.size() << " nodes, expected " << nodes;
        add(r, "shape", -1, os.str());
        return false;
    }
    for (int k = 0; k < nodes; ++k) {
        if (series[k].rows() != rows || series[k].cols() != cols) {
            std::ostringstream os;
            os << name << " is " << series[k].rows() << "x" << series[k].cols() << ", expected "
               << rows << "x" << cols;
            add(r, "shape", k, os.str());
            return false;
        }
    }
    return true;
}

bool check_shape(ValidationReport& r, const char* name, const std::vector<Vec>& series, int nodes,
                 int len) {
    if (static_cast<int>(series.size()) != nodes) {
        std::ostringstream os;
        os << name << " has " << series.size() << " nodes, expected " << nodes;
        add(r, "shape", -1, os.str());
        return false;
    }
    for (int k = 0; k < nodes; ++k) {
        if (series[k].size() != len) {
            std::ostringstream os;
            os << name << " has length " << series[k].size() << ", expected " << len;
            add(r, "shape", k, os.str());
            return false;
        }
    }
    return true;
}

template <class Series>
void check_bounded(ValidationReport& r, const char* name, const Series& series) {
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!series[k].allFinite()) {
            add(r, "H1", static_cast<int>(k), std::string(name) + " has a non-finite entry");
            return;
        }
    }
}

bool symmetric_abs(const Mat& m) {
    return max_abs(m - m.transpose()) <= kSymmetryTol * std::max(1.0, max_abs(m));
}

} // namespace

Coefficients Coefficients::constant(int K, const Mat& A, const Mat& F, const Mat& B, const Mat& D,
                                    const Vec& b, const Vec& sigma, const Mat& Q, const Mat& R,
                                    const Mat& G) {
    const auto nodes = static_cast<std::size_t>(K + 1);
    Coefficients c;
    c.A.assign(nodes, A);
    c.F.assign(nodes, F);
    c.B.assign(nodes, B);
    c.D.assign(nodes, D);
    c.b.assign(nodes, b);
    c.sigma.assign(nodes, sigma);
    c.Q.assign(nodes, Q);
    c.R.assign(nodes, R);
    c.G = G;
    return c;
}

std::string ValidationReport::to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    // Runs of consecutive nodes with the same message print as one line.
    for (std::size_t i = 0; i < violations.size();) {
        const auto& v = violations[i];
        std::size_t j = i + 1;
        while (v.node >= 0 && j < violations.size() && violations[j].assumption == v.assumption &&
               violations[j].message == v.message && violations[j].node == violations[j - 1].node + 1)
            ++j;
        if (i) os << "\n";
        os << "(" << v.assumption << ")";
        if (v.node >= 0) {
            if (j - i > 1) os << " nodes " << v.node << "-" << violations[j - 1].node;
            else os << " node " << v.node;
        }
        os << ": " << v.message;
        i = j;
    }
    return os.str();
}

ValidationReport validate(const ModelSpec& spec, bool strict_h1) {
    ValidationReport r;
    const int n = spec.n;
    const int m = spec.m;
    if (n < 1 || m < 1) {
        add(r, "shape", -1, "state and control dimensions must be positive");
        return r;
    }
    if (!(spec.grid.T > 0.0) || !std::isfinite(spec.grid.T)) add(r, "shape", -1, "horizon T must be positive");
    if (spec.grid.K < 2) add(r, "shape", -1, "step count K must be at least 2");
    if (!r.ok()) return r;
    if (spec.x0.size() != n) add(r, "shape", -1, "x0 must have length n");
    else if (!spec.x0.allFinite()) add(r, "H1", -1, "x0 must be finite");
    if (spec.gamma.dim() != m) add(r, "shape", -1, "constraint set dimension must equal m");
    if (!(spec.r_min > 0.0)) add(r, "H2", -1, "r_min must be positive");

    const int nodes = spec.grid.nodes();
    const auto& c = spec.coeffs;
    bool shapes = true;
    shapes &= check_shape(r, "A", c.A, nodes, n, n);
    shapes &= check_shape(r, "F", c.F, nodes, n, n);
    shapes &= check_shape(r, "B", c.B, nodes, n, m);
    shapes &= check_shape(r, "D", c.D, nodes, n, m);
    shapes &= check_shape(r, "b", c.b, nodes, n);
    shapes &= check_shape(r, "sigma", c.sigma, nodes, n);
    shapes &= check_shape(r, "Q", c.Q, nodes, n, n);
    shapes &= check_shape(r, "R", c.R, nodes, m, m);
    if (c.G.rows() != n || c.G.cols() != n) {
        add(r, "shape", -1, "G must be n x n");
        shapes = false;
    }
    if (!shapes) return r;

    check_bounded(r, "A", c.A);
    check_bounded(r, "F", c.F);
    check_bounded(r, "B", c.B);
    check_bounded(r, "D", c.D);
    check_bounded(r, "b", c.b);
    check_bounded(r, "sigma", c.sigma);
    check_bounded(r, "Q", c.Q);
    check_bounded(r, "R", c.R);
    if (!c.G.allFinite()) add(r, "H2", -1, "G has a non-finite entry");
    if (!r.ok()) return r;

    if (strict_h1) {
        for (int k = 0; k < nodes; ++k) {
            if (!symmetric_abs(c.A[k])) {
                add(r, "H1", k, "A is not symmetric");
                break;
            }
        }
        for (int k = 0; k < nodes; ++k) {
            if (!symmetric_abs(c.F[k])) {
                add(r, "H1", k, "F is not symmetric");
                break;
            }
        }
    }

    for (int k = 0; k < nodes; ++k) {
        if (!symmetric_abs(c.Q[k])) {
            add(r, "H2", k, "Q is not symmetric");
        } else if (symmetric_eigen_range(c.Q[k]).min < -kPsdTol) {
            add(r, "H2", k, "Q is not positive semidefinite");
        }
        if (!symmetric_abs(c.R[k])) {
            add(r, "H2", k, "R is not symmetric");
        } else {
            const double lmin = symmetric_eigen_range(c.R[k]).min;
            if (lmin < spec.r_min) {
                std::ostringstream os;
                os << "R is not positive definite (smallest eigenvalue " << lmin << " < r_min "
                   << spec.r_min << ")";
                add(r, "H2", k, os.str());
            }
        }
    }
    if (!symmetric_abs(c.G)) add(r, "H2", -1, "G is not symmetric");
    else if (symmetric_eigen_range(c.G).min < -kPsdTol) add(r, "H2", -1, "G is not positive semidefinite");
    return r;
}

Model::Model(ModelSpec spec, bool strict_h1) : spec_(std::move(spec)), strict_h1_(strict_h1) {
    ValidationReport report = validate(spec_, strict_h1_);
    if (!report.ok()) throw ValidationFailed(std::move(report));

    const int nodes = spec_.grid.nodes();
    projectors_.reserve(static_cast<std::size_t>(nodes));
    for (int k = 0; k < nodes; ++k) {
        const Mat& R = spec_.coeffs.R[k];
        if (k > 0 && R == spec_.coeffs.R[k - 1]) {
            projectors_.push_back(projectors_.back());
        } else {
            projectors_.emplace_back(spec_.gamma, WeightMatrix(0.5 * (R + R.transpose())));
        }
        const auto ldlt = R.ldlt();
        rinv_bt_.push_back(ldlt.solve(spec_.coeffs.B[k].transpose()));
        rinv_dt_.push_back(ldlt.solve(spec_.coeffs.D[k].transpose()));
        std::vector<double> bt(static_cast<std::size_t>(spec_.m * spec_.n));
        std::vector<double> dt(bt.size());
        for (int i = 0; i < spec_.m; ++i) {
            for (int j = 0; j < spec_.n; ++j) {
                bt[static_cast<std::size_t>(i * spec_.n + j)] = rinv_bt_.back()(i, j);
                dt[static_cast<std::size_t>(i * spec_.n + j)] = rinv_dt_.back()(i, j);
            }
        }
        rinv_bt_flat_.push_back(std::move(bt));
        rinv_dt_flat_.push_back(std::move(dt));
    }
}

void Model::unconstrained_control(int k, const double* p, const double* q, double* a) const {
    const int n = spec_.n;
    const double* bt = rinv_bt_flat_[static_cast<std::size_t>(k)].data();
    const double* dt = rinv_dt_flat_[static_cast<std::size_t>(k)].data();
    for (int i = 0; i < spec_.m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += bt[i * n + j] * p[j] + dt[i * n + j] * q[j];
        a[i] = acc;
    }
}

void Model::control_map(int k, const double* p, const double* q, double* u, double scale) const {
    unconstrained_control(k, p, q, u);
    if (scale != 1.0) {
        for (int i = 0; i < spec_.m; ++i) u[i] *= scale;
    }
    projectors_[static_cast<std::size_t>(k)].apply(std::span<double>(u, static_cast<std::size_t>(spec_.m)));
}

Vec Model::control_map(int k, const Vec& p, const Vec& q) const {
    if (p.size() != spec_.n || q.size() != spec_.n) throw ShapeMismatch("control_map expects n-vectors");
    Vec u(spec_.m);
    control_map(k, p.data(), q.data(), u.data());
    return u;
}

double quad_form(const Mat& w, const double* v) {
    const Eigen::Index d = w.rows();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        double row = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) row += w(i, j) * v[i];
        acc += row * v[j];
    }
    return acc;
}

double hamiltonian(const Model& model, int k, const Vec& p, const Vec& q, const Vec& x,
                   const Vec& u, const Vec& z) {
    const auto& c = model.coeffs();
    if (!model.gamma().contains(u, 1e-9)) throw ControlNotFeasible("control is outside gamma");
    const Vec dev = x - z;
    return p.dot(c.A[k] * x + c.B[k] * u + c.F[k] * z + c.b[k]) + q.dot(c.D[k] * u + c.sigma[k]) -
           0.5 * dev.dot(c.Q[k] * dev) - 0.5 * u.dot(c.R[k] * u);
}

std::vector<double> tracking_cost_per_path(const Model& model, const PathArray& x,
                                           const PathArray& target, const PathArray& u) {
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const long M = x.paths();
    if (x.steps() != K + 1 || x.dim() != n) throw ShapeMismatch("state paths do not match the grid");
    if (u.steps() != K || u.dim() != m || u.paths() != M) throw ShapeMismatch("control paths do not match the grid");
    if (target.steps() != K + 1 || target.dim() != n || (target.paths() != 1 && target.paths() != M))
        throw ShapeMismatch("target paths do not match the grid");
    const bool shared = target.paths() == 1;
    const auto& c = model.coeffs();
    const double dt = model.dt();

    std::vector<double> cost(static_cast<std::size_t>(M), 0.0);
    std::vector<double> dev(static_cast<std::size_t>(n));
    for (long i = 0; i < M; ++i) {
        double running = 0.0;
        for (int k = 0; k < K; ++k) {
            const double* xi = x.at(k, i);
            const double* yi = target.at(k, shared ? 0 : i);
            for (int j = 0; j < n; ++j) dev[static_cast<std::size_t>(j)] = xi[j] - yi[j];
            running += (quad_form(c.Q[k], dev.data()) + quad_form(c.R[k], u.at(k, i))) * dt;
        }
        const double* xT = x.at(K, i);
        const double* yT = target.at(K, shared ? 0 : i);
        for (int j = 0; j < n; ++j) dev[static_cast<std::size_t>(j)] = xT[j] - yT[j];
        running += quad_form(c.G, dev.data());
        cost[static_cast<std::size_t>(i)] = 0.5 * running;
    }
    return cost;
}

PathArray as_single_path(const MeanPath& z) {
    PathArray out(z.nodes(), 1, z.dim());
    for (int k = 0; k < z.nodes(); ++k) {
        for (int j = 0; j < z.dim(); ++j) out(k, 0, j) = z(k, j);
    }
    return out;
}

std::vector<double> limit_cost_per_path(const Model& model, const MeanPath& z, const PathArray& x,
                                        const PathArray& u) {
    if (z.nodes() != model.K() + 1 || z.dim() != model.n()) throw ShapeMismatch("mean path does not match the grid");
    return tracking_cost_per_path(model, x, as_single_path(z), u);
}

CostEstimate mean_and_stderr(const std::vector<double>& values) {
    CostEstimate e;
    if (values.empty()) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    }
    return e;
}

CostEstimate limit_cost_estimate(const Model& model, const MeanPath& z, const PathArray& x,
                                 const PathArray& u) {
    return mean_and_stderr(limit_cost_per_path(model, z, x, u));
}

double limit_cost(const Model& model, const MeanPath& z, const PathArray& x, const PathArray& u) {
    return limit_cost_estimate(model, z, x, u).mean;
}

} // namespace mfglab
