#include "mfglab/oracles.hpp"

#include "mfglab/dynamics.hpp"
#include "mfglab/errors.hpp"
#include "mfglab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfglab {

namespace {

constexpr int kSubsteps = 4;

struct RiccatiState {
    Mat P;
    Vec s;
    double r;
};

struct NodeCoeffs {
    const Mat& A;
    const Mat& B;
    const Mat& D;
    const Mat& F;
    const Vec& b;
    const Vec& sigma;
    const Mat& Q;
    const Mat& R;
};

NodeCoeffs coeffs_at(const Model& model, int k) {
    const auto& c = model.coeffs();
    return {c.A[k], c.B[k], c.D[k], c.F[k], c.b[k], c.sigma[k], c.Q[k], c.R[k]};
}

Vec z_between(const MeanPath& z, int k, double frac) {
    const int n = z.dim();
    Vec out(n);
    for (int j = 0; j < n; ++j) out[j] = (1.0 - frac) * z(k, j) + frac * z(k + 1, j);
    return out;
}

Eigen::LLT<Mat> inner_factor(const NodeCoeffs& c, const Mat& P) {
    const Mat S = c.R + c.D.transpose() * P * c.D;
    Eigen::LLT<Mat> llt(0.5 * (S + S.transpose()));
    if (llt.info() != Eigen::Success) throw SingularInnerMatrix("R + D^T P D lost positive definiteness");
    return llt;
}

// Time derivative (forward in t) of (P, s, r).
RiccatiState derivative(const NodeCoeffs& c, const RiccatiState& y, const Vec& z) {
    const auto llt = inner_factor(c, y.P);
    const Mat BtP = c.B.transpose() * y.P;
    const Vec lin = c.B.transpose() * y.s + c.D.transpose() * (y.P * c.sigma);
    const Vec kff = llt.solve(lin);
    RiccatiState d;
    d.P = -(c.A.transpose() * y.P + y.P * c.A - BtP.transpose() * llt.solve(BtP) + c.Q);
    d.s = y.P * c.B * kff - y.P * (c.F * z) - y.P * c.b - c.A.transpose() * y.s + c.Q * z;
    d.r = -(0.5 * z.dot(c.Q * z) + y.s.dot(c.F * z + c.b) + 0.5 * c.sigma.dot(y.P * c.sigma) -
            0.5 * kff.dot(lin));
    return d;
}

RiccatiState axpy(const RiccatiState& y, double h, const RiccatiState& d) {
    return {y.P + h * d.P, y.s + h * d.s, y.r + h * d.r};
}

} // namespace

RiccatiSolution solve_riccati(const Model& model, const MeanPath& z) {
    if (!model.gamma().is_full_space()) throw InvalidArgument("the Riccati oracle requires an unconstrained control set");
    const int K = model.K();
    if (z.nodes() != K + 1 || z.dim() != model.n()) throw ShapeMismatch("mean path does not match the grid");
    const auto& c = model.coeffs();
    const auto nodes = static_cast<std::size_t>(K + 1);
    RiccatiSolution sol;
    sol.P.resize(nodes);
    sol.s.resize(nodes);
    sol.r.resize(nodes);
    sol.K_fb.resize(nodes);
    sol.k_ff.resize(nodes);

    const Vec zK = Eigen::Map<const Vec>(z.at(K), model.n());
    RiccatiState y{c.G, -(c.G * zK), 0.5 * zK.dot(c.G * zK)};
    sol.P[K] = y.P;
    sol.s[K] = y.s;
    sol.r[K] = y.r;

    const double h = model.dt() / kSubsteps;
    for (int k = K - 1; k >= 0; --k) {
        const NodeCoeffs nc = coeffs_at(model, k);
        for (int sub = kSubsteps; sub > 0; --sub) {
            // Step from tau = sub/kSubsteps to (sub-1)/kSubsteps inside [t_k, t_{k+1}].
            const double f0 = static_cast<double>(sub) / kSubsteps;
            const double fh = (sub - 0.5) / kSubsteps;
            const double f1 = static_cast<double>(sub - 1) / kSubsteps;
            const RiccatiState k1 = derivative(nc, y, z_between(z, k, f0));
            const RiccatiState k2 = derivative(nc, axpy(y, -0.5 * h, k1), z_between(z, k, fh));
            const RiccatiState k3 = derivative(nc, axpy(y, -0.5 * h, k2), z_between(z, k, fh));
            const RiccatiState k4 = derivative(nc, axpy(y, -h, k3), z_between(z, k, f1));
            y.P -= (h / 6.0) * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
            y.s -= (h / 6.0) * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
            y.r -= (h / 6.0) * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
            y.P = 0.5 * (y.P + y.P.transpose());
        }
        sol.P[k] = y.P;
        sol.s[k] = y.s;
        sol.r[k] = y.r;
    }
    for (int k = 0; k <= K; ++k) {
        const NodeCoeffs nc = coeffs_at(model, k);
        const auto llt = inner_factor(nc, sol.P[k]);
        sol.K_fb[k] = llt.solve(nc.B.transpose() * sol.P[k]);
        sol.k_ff[k] = llt.solve(nc.B.transpose() * sol.s[k] + nc.D.transpose() * (sol.P[k] * nc.sigma));
    }
    return sol;
}

MeanPath riccati_mean(const Model& model, const RiccatiSolution& sol, const MeanPath& z) {
    const int K = model.K();
    const int n = model.n();
    MeanPath out(K + 1, n);
    Vec m = model.x0();
    for (int j = 0; j < n; ++j) out(0, j) = m[j];
    const double h = model.dt() / kSubsteps;
    for (int k = 0; k < K; ++k) {
        const NodeCoeffs nc = coeffs_at(model, k);
        // K_fb, k_ff vary within the step; interpolate them linearly between nodes.
        auto rhs = [&](const Vec& x, double frac) -> Vec {
            const Mat Kf = (1.0 - frac) * sol.K_fb[k] + frac * sol.K_fb[k + 1];
            const Vec kf = (1.0 - frac) * sol.k_ff[k] + frac * sol.k_ff[k + 1];
            return nc.A * x - nc.B * (Kf * x + kf) + nc.F * z_between(z, k, frac) + nc.b;
        };
        for (int sub = 0; sub < kSubsteps; ++sub) {
            const double f0 = static_cast<double>(sub) / kSubsteps;
            const double fh = (sub + 0.5) / kSubsteps;
            const double f1 = static_cast<double>(sub + 1) / kSubsteps;
            const Vec k1 = rhs(m, f0);
            const Vec k2 = rhs(m + 0.5 * h * k1, fh);
            const Vec k3 = rhs(m + 0.5 * h * k2, fh);
            const Vec k4 = rhs(m + h * k3, f1);
            m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        for (int j = 0; j < n; ++j) out(k + 1, j) = m[j];
    }
    return out;
}

MeanPath riccati_mean_fixed_point(const Model& model, double tol, int max_iter) {
    const int K = model.K();
    const int n = model.n();
    MeanPath z(K + 1, n);
    for (int k = 0; k <= K; ++k) {
        for (int j = 0; j < n; ++j) z(k, j) = model.x0()[j];
    }
    for (int it = 0; it < max_iter; ++it) {
        const RiccatiSolution sol = solve_riccati(model, z);
        const MeanPath next = riccati_mean(model, sol, z);
        const double diff = MeanPath::max_abs_diff(next, z);
        MeanPath damped(K + 1, n);
        for (int k = 0; k <= K; ++k) {
            for (int j = 0; j < n; ++j) damped(k, j) = 0.5 * z(k, j) + 0.5 * next(k, j);
        }
        z = std::move(damped);
        if (diff <= tol) return next;
    }
    throw OuterNotConverged("Riccati mean fixed point did not converge", {});
}

Quadrature gauss_hermite(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be positive");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Mat J = Mat::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        J(i, i - 1) = std::sqrt(static_cast<double>(i));
        J(i - 1, i) = J(i, i - 1);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(J);
    Quadrature q;
    for (int i = 0; i < order; ++i) {
        q.nodes.push_back(es.eigenvalues()[i]);
        const double v = es.eigenvectors()(0, i);
        q.weights.push_back(v * v);
    }
    return q;
}

DPLattice default_lattice(const Model& model, const MeanPath& z, int points) {
    if (model.n() != 1 || model.m() != 1) throw InvalidArgument("the lattice oracle is one-dimensional");
    const auto& c = model.coeffs();
    const int K = model.K();
    const double dt = model.dt();
    // Uncontrolled Euler moments: mean under A x + F z + b, variance from sigma.
    double mean = model.x0()[0];
    double var = 0.0;
    double lo = mean;
    double hi = mean;
    double sd_max = 0.0;
    for (int k = 0; k < K; ++k) {
        const double a = c.A[k](0, 0);
        mean += (a * mean + c.F[k](0, 0) * z(k, 0) + c.b[k][0]) * dt;
        var = (1.0 + a * dt) * (1.0 + a * dt) * var + c.sigma[k][0] * c.sigma[k][0] * dt;
        lo = std::min({lo, mean, z(k + 1, 0)});
        hi = std::max({hi, mean, z(k + 1, 0)});
        sd_max = std::max(sd_max, std::sqrt(var));
    }
    if (sd_max == 0.0) sd_max = 1.0;
    DPLattice lat;
    lat.lower = lo - 6.0 * sd_max;
    lat.upper = hi + 6.0 * sd_max;
    lat.points = points;
    return lat;
}

double DPValueTable::value_at(int k, double x) const {
    const auto& v = value[static_cast<std::size_t>(k)];
    const double c = curvature[static_cast<std::size_t>(k)];
    const double h = spacing();
    const double pos = (x - lower) / h;
    const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, points - 2);
    const double t = pos - j;
    const double x0 = this->x(j);
    const double x1 = this->x(j + 1);
    const double w0 = v[static_cast<std::size_t>(j)] - 0.5 * c * x0 * x0;
    const double w1 = v[static_cast<std::size_t>(j + 1)] - 0.5 * c * x1 * x1;
    return w0 + t * (w1 - w0) + 0.5 * c * x * x;
}

namespace {

// Chord curvature through the lattice quartiles; exact for quadratics.
double chord_curvature(const DPValueTable& t, const std::vector<double>& v) {
    const int a = (t.points - 1) / 4;
    const int m = (t.points - 1) / 2;
    const int b = m + (m - a);
    const double h = (m - a) * t.spacing();
    const double c = (v[static_cast<std::size_t>(a)] - 2.0 * v[static_cast<std::size_t>(m)] + v[static_cast<std::size_t>(b)]) / (h * h);
    return std::isfinite(c) ? std::max(0.0, c) : 0.0;
}

} // namespace

double DPValueTable::policy_at(int k, double x) const {
    const auto& v = policy[static_cast<std::size_t>(k)];
    const double h = spacing();
    const double pos = std::clamp((x - lower) / h, 0.0, static_cast<double>(points - 1));
    const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, points - 2);
    const double t = pos - j;
    return v[static_cast<std::size_t>(j)] + t * (v[static_cast<std::size_t>(j + 1)] - v[static_cast<std::size_t>(j)]);
}

DPValueTable solve_dp_1d(const Model& model, const MeanPath& z, const DPLattice& lattice) {
    if (model.n() != 1 || model.m() != 1) throw InvalidArgument("the lattice oracle requires n = m = 1");
    if (lattice.points < 3 || !(lattice.upper > lattice.lower)) throw InvalidArgument("lattice must have at least 3 points and positive width");
    const int K = model.K();
    const int J = lattice.points;
    const double dt = model.dt();
    const double sqdt = std::sqrt(dt);
    const auto& c = model.coeffs();
    const Quadrature gh = gauss_hermite(lattice.quadrature_order);
    const auto [ulo, uhi] = model.gamma().as_interval();

    DPValueTable table;
    table.lower = lattice.lower;
    table.upper = lattice.upper;
    table.points = J;
    table.value.assign(static_cast<std::size_t>(K + 1), std::vector<double>(static_cast<std::size_t>(J)));
    table.policy.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(J)));
    table.curvature.assign(static_cast<std::size_t>(K + 1), 0.0);

    const double G = c.G(0, 0);
    for (int j = 0; j < J; ++j) {
        const double d = table.x(j) - z(K, 0);
        table.value[static_cast<std::size_t>(K)][static_cast<std::size_t>(j)] = 0.5 * G * d * d;
    }
    table.curvature[static_cast<std::size_t>(K)] = chord_curvature(table, table.value[static_cast<std::size_t>(K)]);

    const double h = table.spacing();
    for (int k = K - 1; k >= 0; --k) {
        const double A = c.A[k](0, 0);
        const double B = c.B[k](0, 0);
        const double D = c.D[k](0, 0);
        const double F = c.F[k](0, 0);
        const double b = c.b[k][0];
        const double sig = c.sigma[k][0];
        const double Q = c.Q[k](0, 0);
        const double R = c.R[k](0, 0);
        const double zk = z(k, 0);
        parallel_chunks(J, 64, [&](long, long begin, long end) {
            for (long jj = begin; jj < end; ++jj) {
                const int j = static_cast<int>(jj);
                const double x = table.x(j);
                const double dev = x - zk;
                const double base = x + (A * x + F * zk + b) * dt;
                auto g = [&](double u) {
                    const double mean = base + B * u * dt;
                    const double vol = (D * u + sig) * sqdt;
                    double e = 0.0;
                    for (std::size_t l = 0; l < gh.nodes.size(); ++l)
                        e += gh.weights[l] * table.value_at(k + 1, mean + vol * gh.nodes[l]);
                    return 0.5 * (Q * dev * dev + R * u * u) * dt + e;
                };
                // Vertex of the local quadratic model of g, clamped to the feasible interval.
                const double v1 = (table.value_at(k + 1, x + h) - table.value_at(k + 1, x - h)) / (2 * h);
                const double v2 = std::max(0.0, (table.value_at(k + 1, x + h) - 2 * table.value_at(k + 1, x) +
                                                  table.value_at(k + 1, x - h)) / (h * h));
                const double curv = R * dt + v2 * (B * B * dt * dt + D * D * dt);
                double vertex = -(B * dt * (v1 + v2 * (base - x)) + D * sig * dt * v2) / curv;
                vertex = std::clamp(vertex, ulo, uhi);

                double lo = ulo;
                double hi = uhi;
                const double w0 = std::max(1.0, std::abs(vertex));
                auto expand = [&](double dir, double limit) {
                    double w = w0;
                    for (int it = 0; it < 200; ++it) {
                        const double e = vertex + dir * w;
                        if (dir > 0 ? e >= limit : e <= limit) return limit;
                        if (g(e) >= g(e - dir * 1e-3 * w)) return e;
                        w *= 2.0;
                    }
                    return vertex + dir * w;
                };
                if (!std::isfinite(lo)) lo = expand(-1.0, lo);
                if (!std::isfinite(hi)) hi = expand(1.0, hi);

                constexpr double invphi = 0.6180339887498949;
                double a = lo;
                double bb = hi;
                double c1 = bb - invphi * (bb - a);
                double c2 = a + invphi * (bb - a);
                double g1 = g(c1);
                double g2 = g(c2);
                while (bb - a > 1e-10) {
                    if (g1 <= g2) {
                        bb = c2;
                        c2 = c1;
                        g2 = g1;
                        c1 = bb - invphi * (bb - a);
                        g1 = g(c1);
                    } else {
                        a = c1;
                        c1 = c2;
                        g1 = g2;
                        c2 = a + invphi * (bb - a);
                        g2 = g(c2);
                    }
                }
                double best = 0.5 * (a + bb);
                double gbest = g(best);
                for (double cand : {lo, hi}) {
                    const double gc = g(cand);
                    if (gc < gbest) {
                        gbest = gc;
                        best = cand;
                    }
                }
                table.policy[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = best;
                table.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = gbest;
            }
        });
        table.curvature[static_cast<std::size_t>(k)] = chord_curvature(table, table.value[static_cast<std::size_t>(k)]);
    }

    // Forward propagation of the optimal policy's law from x0 to measure the
    // probability mass the quadrature sends outside the lattice.
    std::vector<double> mass(static_cast<std::size_t>(J), 0.0);
    std::vector<double> next(static_cast<std::size_t>(J), 0.0);
    auto deposit = [&](std::vector<double>& dst, double x, double w) -> double {
        if (x < table.lower || x > table.upper) return w;
        const double pos = (x - table.lower) / h;
        const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, J - 2);
        const double t = pos - j;
        dst[static_cast<std::size_t>(j)] += (1.0 - t) * w;
        dst[static_cast<std::size_t>(j + 1)] += t * w;
        return 0.0;
    };
    if (deposit(mass, model.x0()[0], 1.0) > 0.0) {
        std::ostringstream os;
        os << "initial state " << model.x0()[0] << " lies outside the lattice [" << table.lower << ", " << table.upper << "]";
        throw LatticeTooNarrow(os.str());
    }
    for (int k = 0; k < K; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        double exited = 0.0;
        double total = 0.0;
        for (int j = 0; j < J; ++j) {
            const double w = mass[static_cast<std::size_t>(j)];
            if (w == 0.0) continue;
            total += w;
            const double x = table.x(j);
            const double u = table.policy[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            const double mean = x + (c.A[k](0, 0) * x + c.B[k](0, 0) * u + c.F[k](0, 0) * z(k, 0) + c.b[k][0]) * dt;
            const double vol = (c.D[k](0, 0) * u + c.sigma[k][0]) * sqdt;
            for (std::size_t l = 0; l < gh.nodes.size(); ++l) exited += deposit(next, mean + vol * gh.nodes[l], w * gh.weights[l]);
        }
        const double frac = total > 0.0 ? exited / total : 0.0;
        table.max_exit_fraction = std::max(table.max_exit_fraction, frac);
        if (frac >= lattice.max_exit_fraction) {
            std::ostringstream os;
            os << "lattice [" << table.lower << ", " << table.upper << "] loses " << frac
               << " of the probability mass at step " << k;
            throw LatticeTooNarrow(os.str());
        }
        std::swap(mass, next);
    }
    return table;
}

} // namespace mfglab
