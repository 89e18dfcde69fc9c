#include "mfglab/fbsde.hpp"

#include "mfglab/dynamics.hpp"
#include "mfglab/errors.hpp"
#include "mfglab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace mfglab {

namespace {

constexpr long kChunk = 2048;

void check_noise(const Model& model, const NoiseBank& noise) {
    if (noise.steps() != model.K()) throw ShapeMismatch("noise bank step count does not match the grid");
    if (std::abs(noise.dt() - model.dt()) > 1e-12 * model.dt())
        throw ShapeMismatch("noise bank step size does not match the grid");
}

void check_mean(const Model& model, const MeanPath& z) {
    if (z.nodes() != model.K() + 1 || z.dim() != model.n()) throw ShapeMismatch("mean path does not match the grid");
}

void check_finite_node(const PathArray& x, int k, long begin, long end) {
    const int n = x.dim();
    for (long i = begin; i < end; ++i) {
        const double* xi = x.at(k, i);
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(xi[j])) {
                std::ostringstream os;
                os << "state left the finite range at step " << k << " on path " << i;
                throw NonFiniteState(os.str(), k, i);
            }
        }
    }
}

} // namespace

PathEnsemble simulate_forward(const Model& model, const MeanPath& z, const PathArray& u,
                              const NoiseBank& noise) {
    check_noise(model, noise);
    check_mean(model, z);
    const int K = model.K();
    const int n = model.n();
    const long M = noise.paths();
    if (u.steps() != K || u.paths() != M || u.dim() != model.m())
        throw ShapeMismatch("control paths do not match the noise bank");
    const Dynamics dyn(model);
    PathEnsemble out{PathArray(K + 1, M, n), u, noise.seed()};
    parallel_chunks(M, kChunk, [&](long, long begin, long end) {
        for (long i = begin; i < end; ++i) {
            for (int j = 0; j < n; ++j) out.x(0, i, j) = model.x0()[j];
        }
        for (int k = 0; k < K; ++k) {
            for (long i = begin; i < end; ++i) {
                dyn.step(k, out.x.at(k, i), u.at(k, i), z.at(k), noise.dw(k, i), out.x.at(k + 1, i));
            }
            check_finite_node(out.x, k + 1, begin, end);
        }
    });
    return out;
}

PathEnsemble simulate_forward(const Model& model, const MeanPath& z, const FeedbackPolicy& policy,
                              const NoiseBank& noise) {
    check_noise(model, noise);
    check_mean(model, z);
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const long M = noise.paths();
    const Dynamics dyn(model);
    PathEnsemble out{PathArray(K + 1, M, n), PathArray(K, M, m), noise.seed()};
    parallel_chunks(M, kChunk, [&](long, long begin, long end) {
        for (long i = begin; i < end; ++i) {
            for (int j = 0; j < n; ++j) out.x(0, i, j) = model.x0()[j];
        }
        for (int k = 0; k < K; ++k) {
            for (long i = begin; i < end; ++i) {
                double* ui = out.u.at(k, i);
                policy(k, out.x.at(k, i), ui);
                dyn.step(k, out.x.at(k, i), ui, z.at(k), noise.dw(k, i), out.x.at(k + 1, i));
            }
            check_finite_node(out.x, k + 1, begin, end);
        }
    });
    return out;
}

AdjointPolicy::AdjointPolicy(int n, int degree, std::vector<Node> nodes)
    : basis_(std::make_shared<MonomialBasis>(n, degree)), nodes_(std::move(nodes)) {}

void AdjointPolicy::adjoint(int k, const double* x, double* p, double* q) const {
    const Node& nd = nodes_[static_cast<std::size_t>(k)];
    evaluate_fit(*basis_, nd.norm, nd.coef_p, x, p);
    evaluate_fit(*basis_, nd.norm, nd.coef_q, x, q);
}

void AdjointPolicy::control(const Model& model, int k, const double* x, double* u, double scale) const {
    double buf[32];
    std::vector<double> heap;
    double* p = buf;
    const int n = basis_->dim();
    if (2 * n > 32) {
        heap.resize(static_cast<std::size_t>(2 * n));
        p = heap.data();
    }
    adjoint(k, x, p, p + n);
    model.control_map(k, p, p + n, u, scale);
}

BackwardSolution backward_pass(const Model& model, const MeanPath& z, const PathEnsemble& ensemble,
                               const NoiseBank& noise, int degree) {
    check_noise(model, noise);
    check_mean(model, z);
    const int K = model.K();
    const int n = model.n();
    const long M = ensemble.x.paths();
    if (ensemble.x.steps() != K + 1 || ensemble.x.dim() != n || M != noise.paths())
        throw ShapeMismatch("ensemble does not match the noise bank");
    if (ensemble.noise_seed != noise.seed()) throw MismatchedNoise("ensemble was simulated with a different noise bank");
    const auto& c = model.coeffs();
    const double dt = model.dt();
    const Dynamics dyn(model);
    const MonomialBasis basis(n, degree);
    const int L = basis.size();

    BackwardSolution out;
    out.p = PathArray(K + 1, M, n);
    out.q = PathArray(K, M, n);
    out.residual_p.assign(static_cast<std::size_t>(K), 0.0);
    std::vector<AdjointPolicy::Node> nodes(static_cast<std::size_t>(K + 1));

    // Terminal condition, exact pathwise.
    const Vec zK = Eigen::Map<const Vec>(z.at(K), n);
    parallel_chunks(M, kChunk, [&](long, long begin, long end) {
        for (long i = begin; i < end; ++i) {
            const double* x = ensemble.x.at(K, i);
            double* p = out.p.at(K, i);
            for (int r = 0; r < n; ++r) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += c.G(r, j) * (x[j] - zK[j]);
                p[r] = -acc;
            }
        }
    });
    {
        const RegressionDesign design(basis, ensemble.x.node(K), M, kRegressionRidge);
        AdjointPolicy::Node& nd = nodes[static_cast<std::size_t>(K)];
        nd.norm = design.standardization();
        nd.coef_p = Mat::Zero(L, n);
        nd.coef_q = Mat::Zero(L, n);
        Vec shift = Eigen::Map<const Vec>(nd.norm.shift.data(), n);
        nd.coef_p.row(0) = -(c.G * (shift - zK)).transpose();
        for (int j = 0; j < n; ++j) {
            nd.coef_p.row(basis.linear_index(j)) = -(nd.norm.scale[static_cast<std::size_t>(j)] * c.G.col(j)).transpose();
        }
    }

    std::vector<double> fitted(static_cast<std::size_t>(M) * n);
    std::vector<double> target(static_cast<std::size_t>(M) * n);
    for (int k = K - 1; k >= 0; --k) {
        const RegressionDesign design(basis, ensemble.x.node(k), M, kRegressionRidge);
        if (design.rank_deficient()) ++out.rank_deficient_nodes;
        const Mat coef_e = design.fit(out.p.node(k + 1), n, fitted);

        const std::span<const double> next = out.p.node(k + 1);
        double ss = 0.0;
        for (long i = 0; i < M * n; ++i) {
            const double resid = next[static_cast<std::size_t>(i)] - fitted[static_cast<std::size_t>(i)];
            ss += resid * resid;
        }
        out.residual_p[static_cast<std::size_t>(k)] = std::sqrt(ss / static_cast<double>(M * n));

        parallel_chunks(M, kChunk, [&](long, long begin, long end) {
            for (long i = begin; i < end; ++i) {
                const double w = noise.dw(k, i) / dt;
                for (int j = 0; j < n; ++j) {
                    const auto idx = static_cast<std::size_t>(i * n + j);
                    target[idx] = (next[idx] - fitted[idx]) * w;
                }
            }
        });
        AdjointPolicy::Node& nd = nodes[static_cast<std::size_t>(k)];
        nd.coef_q = design.fit(target, n, out.q.node(k));

        parallel_chunks(M, kChunk, [&](long, long begin, long end) {
            for (long i = begin; i < end; ++i) {
                dyn.adjoint_step(k, fitted.data() + i * n, ensemble.x.at(k, i), z.at(k), out.p.at(k, i));
            }
        });

        // Same map on the coefficients: rows c_l^T (I + dt A) plus the linear
        // -dt Q (x - z) term expressed in the standardized variables.
        nd.norm = design.standardization();
        const Mat I = Mat::Identity(n, n);
        nd.coef_p = coef_e * (I + dt * c.A[k]);
        const Vec zk = Eigen::Map<const Vec>(z.at(k), n);
        const Vec shift = Eigen::Map<const Vec>(nd.norm.shift.data(), n);
        nd.coef_p.row(0) -= dt * (c.Q[k] * (shift - zk)).transpose();
        for (int j = 0; j < n; ++j) {
            nd.coef_p.row(basis.linear_index(j)) -=
                dt * nd.norm.scale[static_cast<std::size_t>(j)] * c.Q[k].col(j).transpose();
        }
    }
    out.policy = AdjointPolicy(n, degree, std::move(nodes));
    return out;
}

void PicardConfig::validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("Picard damping theta must lie in (0, 1]");
    if (!(tol_u > 0.0)) throw InvalidArgument("Picard tolerance tol_u must be positive");
    if (degree < 1) throw InvalidArgument("regression degree must be at least 1");
    if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
    if (paths < 2) throw InvalidArgument("path count must be at least 2");
}

void FBSDESolution::require_converged() const {
    if (converged) return;
    std::ostringstream os;
    os << "Picard iteration did not converge in " << log.size() << " iterations (last change "
       << (log.empty() ? 0.0 : log.back()) << ")";
    throw NotConverged(os.str(), log);
}

PathArray nearest_feasible_to_zero(const Model& model, long paths) {
    const int K = model.K();
    const int m = model.m();
    PathArray u(K, paths, m);
    for (int k = 0; k < K; ++k) {
        const Vec u0 = model.project_control(k, Vec::Zero(m));
        for (long i = 0; i < paths; ++i) {
            for (int j = 0; j < m; ++j) u(k, i, j) = u0[j];
        }
    }
    return u;
}

double control_l2_distance(const PathArray& a, const PathArray& b, double dt) {
    if (!a.same_shape(b)) throw ShapeMismatch("control arrays differ in shape");
    const long M = a.paths();
    const int m = a.dim();
    const long chunks = chunk_count(M, kChunk);
    std::vector<double> part(static_cast<std::size_t>(chunks), 0.0);
    parallel_chunks(M, kChunk, [&](long ch, long begin, long end) {
        double s = 0.0;
        for (int k = 0; k < a.steps(); ++k) {
            for (long i = begin; i < end; ++i) {
                const double* x = a.at(k, i);
                const double* y = b.at(k, i);
                for (int j = 0; j < m; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
            }
        }
        part[static_cast<std::size_t>(ch)] = s;
    });
    double total = 0.0;
    for (double s : part) total += s;
    return std::sqrt(total * dt / static_cast<double>(M));
}

FBSDESolution picard_solve_frozen(const Model& model, const MeanPath& z, const PicardConfig& config,
                                  const NoiseBank& noise, const PathArray* initial) {
    config.validate();
    check_noise(model, noise);
    check_mean(model, z);
    const int K = model.K();
    const int m = model.m();
    const long M = noise.paths();
    const double dt = model.dt();

    PathArray u;
    if (initial) {
        if (initial->steps() != K || initial->paths() != M || initial->dim() != m)
            throw ShapeMismatch("initial control does not match the noise bank");
        u = *initial;
        for (int k = 0; k < K; ++k) {
            for (long i = 0; i < M; ++i) {
                model.projector(k).apply(std::span<double>(u.at(k, i), static_cast<std::size_t>(m)));
            }
        }
    } else {
        u = nearest_feasible_to_zero(model, M);
    }

    FBSDESolution sol;
    sol.noise_paths = M;
    sol.noise_steps = K;
    PathArray next(K, M, m);
    for (int it = 0; it < config.max_iter; ++it) {
        PathEnsemble ens = simulate_forward(model, z, u, noise);
        BackwardSolution back = backward_pass(model, z, ens, noise, config.degree);
        parallel_chunks(M, kChunk, [&](long, long begin, long end) {
            std::vector<double> cand(static_cast<std::size_t>(m));
            for (int k = 0; k < K; ++k) {
                for (long i = begin; i < end; ++i) {
                    model.control_map(k, back.p.at(k, i), back.q.at(k, i), cand.data());
                    const double* cur = u.at(k, i);
                    double* nu = next.at(k, i);
                    // u + theta (cand - u) keeps u exactly when cand == u.
                    for (int j = 0; j < m; ++j) nu[j] = cur[j] + config.theta * (cand[static_cast<std::size_t>(j)] - cur[j]);
                    model.projector(k).apply(std::span<double>(nu, static_cast<std::size_t>(m)));
                }
            }
        });
        const double change = control_l2_distance(next, u, dt);
        sol.log.push_back(change);
        std::swap(u, next);
        if (change <= config.tol_u) {
            sol.converged = true;
            break;
        }
    }
    sol.ensemble = simulate_forward(model, z, u, noise);
    sol.backward = backward_pass(model, z, sol.ensemble, noise, config.degree);
    return sol;
}

double monotonicity_diagnostic(const Model& model, const FBSDESolution& a, const FBSDESolution& b) {
    if (a.ensemble.noise_seed != b.ensemble.noise_seed || a.noise_paths != b.noise_paths ||
        a.noise_steps != b.noise_steps)
        throw MismatchedNoise("solutions were computed on different noise banks");
    const int K = model.K();
    const int n = model.n();
    const int m = model.m();
    const long M = a.noise_paths;
    if (a.noise_steps != K) throw ShapeMismatch("solutions do not match the model grid");
    const auto& c = model.coeffs();
    const long chunks = chunk_count(M, kChunk);
    std::vector<double> part(static_cast<std::size_t>(chunks), 0.0);
    parallel_chunks(M, kChunk, [&](long ch, long begin, long end) {
        std::vector<double> ua(static_cast<std::size_t>(m));
        std::vector<double> ub(static_cast<std::size_t>(m));
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            for (long i = begin; i < end; ++i) {
                const double* pa = a.backward.p.at(k, i);
                const double* pb = b.backward.p.at(k, i);
                const double* qa = a.backward.q.at(k, i);
                const double* qb = b.backward.q.at(k, i);
                model.control_map(k, pa, qa, ua.data());
                model.control_map(k, pb, qb, ub.data());
                for (int r = 0; r < m; ++r) {
                    double g = 0.0;
                    for (int j = 0; j < n; ++j) g += c.B[k](j, r) * (pa[j] - pb[j]) + c.D[k](j, r) * (qa[j] - qb[j]);
                    s += (ua[static_cast<std::size_t>(r)] - ub[static_cast<std::size_t>(r)]) * g;
                }
            }
        }
        part[static_cast<std::size_t>(ch)] = s;
    });
    double total = 0.0;
    for (double s : part) total += s;
    return total * model.dt() / static_cast<double>(M);
}

} // namespace mfglab
