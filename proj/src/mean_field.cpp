#include "mfglab/mean_field.hpp"

#include "mfglab/errors.hpp"
#include "mfglab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace mfglab {

namespace {

constexpr long kChunk = 4096;

// Per-node column sums of `x` (and of squares when `squares` is set).
std::vector<double> node_sums(const PathArray& x, bool squares) {
    const int steps = x.steps();
    const int d = x.dim();
    const long M = x.paths();
    const long chunks = chunk_count(M, kChunk);
    const std::size_t width = static_cast<std::size_t>(steps) * d;
    std::vector<double> part(static_cast<std::size_t>(chunks) * width, 0.0);
    parallel_chunks(M, kChunk, [&](long ch, long begin, long end) {
        double* out = part.data() + static_cast<std::size_t>(ch) * width;
        for (int k = 0; k < steps; ++k) {
            for (long i = begin; i < end; ++i) {
                const double* xi = x.at(k, i);
                for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(k) * d + j] += squares ? xi[j] * xi[j] : xi[j];
            }
        }
    });
    std::vector<double> total(width, 0.0);
    for (long ch = 0; ch < chunks; ++ch) {
        for (std::size_t w = 0; w < width; ++w) total[w] += part[static_cast<std::size_t>(ch) * width + w];
    }
    return total;
}

} // namespace

void FixedPointConfig::validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("outer damping rho must lie in (0, 1]");
    if (max_outer < 1) throw InvalidArgument("max_outer must be positive");
    if (!std::isfinite(tol_z)) throw InvalidArgument("tol_z must be finite");
    inner.validate();
}

double FixedPointConfig::resolved_tol(const Model& model) const {
    return tol_z > 0.0 ? tol_z : 1e-4 * (1.0 + model.x0().norm());
}

MeanPath sample_mean(const PathArray& x) {
    const auto sums = node_sums(x, false);
    MeanPath out(x.steps(), x.dim());
    for (int k = 0; k < x.steps(); ++k) {
        for (int j = 0; j < x.dim(); ++j) out(k, j) = sums[static_cast<std::size_t>(k) * x.dim() + j] / static_cast<double>(x.paths());
    }
    return out;
}

MeanPath sample_stderr(const PathArray& x) {
    const auto sums = node_sums(x, false);
    const auto sq = node_sums(x, true);
    const double M = static_cast<double>(x.paths());
    MeanPath out(x.steps(), x.dim());
    for (int k = 0; k < x.steps(); ++k) {
        for (int j = 0; j < x.dim(); ++j) {
            const auto idx = static_cast<std::size_t>(k) * x.dim() + j;
            const double mean = sums[idx] / M;
            const double var = std::max(0.0, (sq[idx] - M * mean * mean) / std::max(1.0, M - 1.0));
            out(k, j) = std::sqrt(var / M);
        }
    }
    return out;
}

MeanPath initial_mean_guess(const Model& model) {
    const int K = model.K();
    const int n = model.n();
    const auto& c = model.coeffs();
    MeanPath z(K + 1, n);
    Vec m = model.x0();
    for (int j = 0; j < n; ++j) z(0, j) = m[j];
    for (int k = 0; k < K; ++k) {
        const Vec u0 = model.project_control(k, Vec::Zero(model.m()));
        m = m + ((c.A[k] + c.F[k]) * m + c.B[k] * u0 + c.b[k]) * model.dt();
        for (int j = 0; j < n; ++j) z(k + 1, j) = m[j];
    }
    return z;
}

FixedPointResult fixed_point_iterate(const Model& model, const FixedPointConfig& config, const NoiseBank& noise) {
    config.validate();
    const double tol = config.resolved_tol(model);
    const int K = model.K();
    const int n = model.n();
    FixedPointResult res;
    res.z = initial_mean_guess(model);
    PathArray warm;
    for (int r = 0; r < config.max_outer; ++r) {
        const PathArray* init = (config.warm_start && warm.paths() > 0) ? &warm : nullptr;
        res.sol = picard_solve_frozen(model, res.z, config.inner, noise, init);
        const MeanPath mean = sample_mean(res.sol.ensemble.x);
        res.consistency_residual = MeanPath::max_abs_diff(mean, res.z);
        MeanPath next(K + 1, n);
        for (int k = 0; k <= K; ++k) {
            for (int j = 0; j < n; ++j) next(k, j) = (1.0 - config.rho) * res.z(k, j) + config.rho * mean(k, j);
        }
        const double change = MeanPath::max_abs_diff(next, res.z);
        res.diagnostics.push_back({r + 1, change, res.sol.iterations(), res.sol.converged});
        if (!res.sol.converged) {
            res.status = FixedPointStatus::InnerNotConverged;
            return res;
        }
        if (change <= tol) {
            res.status = FixedPointStatus::Converged;
            return res;
        }
        if (config.warm_start) warm = res.sol.ensemble.u;
        res.z = std::move(next);
    }
    res.status = FixedPointStatus::OuterNotConverged;
    return res;
}

FixedPointResult fixed_point_solve(const Model& model, const FixedPointConfig& config, const NoiseBank& noise) {
    FixedPointResult res = fixed_point_iterate(model, config, noise);
    if (res.status == FixedPointStatus::InnerNotConverged) {
        std::ostringstream os;
        os << "inner Picard solve failed at outer iteration " << res.diagnostics.size() << " after "
           << res.sol.iterations() << " iterations";
        throw NotConverged(os.str(), res.sol.log);
    }
    if (res.status == FixedPointStatus::OuterNotConverged) {
        std::vector<double> residuals;
        for (const auto& d : res.diagnostics) residuals.push_back(d.residual);
        std::ostringstream os;
        os << "mean-field fixed point did not converge in " << config.max_outer << " outer iterations";
        throw OuterNotConverged(os.str(), residuals);
    }
    return res;
}

double mean_ode_check(const Model& model, const MeanPath& z, const FBSDESolution& sol) {
    const int K = model.K();
    const int n = model.n();
    if (z.nodes() != K + 1 || z.dim() != n) throw ShapeMismatch("mean path does not match the grid");
    const auto& c = model.coeffs();
    const MeanPath ubar = sample_mean(sol.ensemble.u);
    Vec m = model.x0();
    double worst = (m - Eigen::Map<const Vec>(z.at(0), n)).cwiseAbs().maxCoeff();
    for (int k = 0; k < K; ++k) {
        const Vec u = Eigen::Map<const Vec>(ubar.at(k), model.m());
        m = m + ((c.A[k] + c.F[k]) * m + c.B[k] * u + c.b[k]) * model.dt();
        worst = std::max(worst, (m - Eigen::Map<const Vec>(z.at(k + 1), n)).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace mfglab
