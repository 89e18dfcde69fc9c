#include "mfglab/convex_sets.hpp"

#include "mfglab/errors.hpp"

#include <algorithm>
#include <sstream>

namespace mfglab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(const Vec& v, const char* what) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isnan(v[i])) throw InvalidArgument(std::string(what) + " contains NaN");
    }
}

Vec clamp_box(const Vec& x, const Vec& lower, const Vec& upper) {
    Vec y = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        y[j] = std::min(std::max(x[j], lower[j]), upper[j]);
    }
    return y;
}

constexpr int kMaxProjectedGradientIters = 100000;
constexpr double kProjectedGradientTol = 1e-12;

} // namespace

ConvexSet ConvexSet::full(int dim) {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    return ConvexSet(FullSpace{dim});
}

ConvexSet ConvexSet::orthant(int dim) {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    return ConvexSet(NonnegativeOrthant{dim});
}

ConvexSet ConvexSet::box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() < 1)
        throw InvalidArgument("box bounds must have equal positive length");
    require_finite(lower, "box lower bound");
    require_finite(upper, "box upper bound");
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        if (!(lower[j] <= upper[j])) {
            std::ostringstream os;
            os << "box is empty in coordinate " << j << ": lower " << lower[j] << " > upper "
               << upper[j];
            throw InvalidArgument(os.str());
        }
        if (lower[j] == kInf || upper[j] == -kInf)
            throw InvalidArgument("box bound is infinite on the wrong side");
    }
    return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::interval(double lower, double upper) {
    return box(Vec::Constant(1, lower), Vec::Constant(1, upper));
}

ConvexSet ConvexSet::ball(Vec center, double radius) {
    if (center.size() < 1) throw InvalidArgument("ball center must be nonempty");
    if (!center.allFinite()) throw InvalidArgument("ball center must be finite");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("ball radius must be positive and finite");
    return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::halfspace(Vec normal, double offset) {
    if (normal.size() < 1) throw InvalidArgument("halfspace normal must be nonempty");
    if (!normal.allFinite() || !std::isfinite(offset))
        throw InvalidArgument("halfspace parameters must be finite");
    if (normal.norm() == 0.0) throw InvalidArgument("halfspace normal must be nonzero");
    return ConvexSet(HalfSpace{std::move(normal), offset});
}

ConvexSet ConvexSet::singleton(Vec point) {
    if (point.size() < 1) throw InvalidArgument("singleton point must be nonempty");
    if (!point.allFinite()) throw InvalidArgument("singleton point must be finite");
    return ConvexSet(Singleton{std::move(point)});
}

int ConvexSet::dim() const {
    return std::visit(overloaded{
                          [](const FullSpace& s) { return s.dim; },
                          [](const NonnegativeOrthant& s) { return s.dim; },
                          [](const Box& s) { return static_cast<int>(s.lower.size()); },
                          [](const Ball& s) { return static_cast<int>(s.center.size()); },
                          [](const HalfSpace& s) { return static_cast<int>(s.normal.size()); },
                          [](const Singleton& s) { return static_cast<int>(s.point.size()); },
                      },
                      v_);
}

std::string_view ConvexSet::type_name() const {
    return std::visit(overloaded{
                          [](const FullSpace&) { return std::string_view("full"); },
                          [](const NonnegativeOrthant&) { return std::string_view("orthant"); },
                          [](const Box&) { return std::string_view("box"); },
                          [](const Ball&) { return std::string_view("ball"); },
                          [](const HalfSpace&) { return std::string_view("halfspace"); },
                          [](const Singleton&) { return std::string_view("singleton"); },
                      },
                      v_);
}

bool ConvexSet::contains(const Vec& y, double tol) const {
    if (y.size() != dim() || !y.allFinite()) return false;
    return std::visit(
        overloaded{
            [](const FullSpace&) { return true; },
            [&](const NonnegativeOrthant&) { return y.minCoeff() >= -tol; },
            [&](const Box& s) {
                for (Eigen::Index j = 0; j < y.size(); ++j) {
                    if (y[j] < s.lower[j] - tol || y[j] > s.upper[j] + tol) return false;
                }
                return true;
            },
            [&](const Ball& s) { return (y - s.center).norm() <= s.radius + tol; },
            [&](const HalfSpace& s) { return s.normal.dot(y) <= s.offset + tol * s.normal.norm(); },
            [&](const Singleton& s) { return (y - s.point).cwiseAbs().maxCoeff() <= tol; },
        },
        v_);
}

Vec ConvexSet::witness() const {
    return std::visit(overloaded{
                          [](const FullSpace& s) -> Vec { return Vec::Zero(s.dim); },
                          [](const NonnegativeOrthant& s) -> Vec { return Vec::Zero(s.dim); },
                          [](const Box& s) -> Vec { return clamp_box(Vec::Zero(s.lower.size()), s.lower, s.upper); },
                          [](const Ball& s) -> Vec { return s.center; },
                          [](const HalfSpace& s) -> Vec {
                              return s.normal * (s.offset / s.normal.squaredNorm());
                          },
                          [](const Singleton& s) -> Vec { return s.point; },
                      },
                      v_);
}

Vec ConvexSet::project(const Vec& x) const {
    if (x.size() != dim()) throw ShapeMismatch("projection input has wrong dimension");
    return std::visit(
        overloaded{
            [&](const FullSpace&) -> Vec { return x; },
            [&](const NonnegativeOrthant&) -> Vec { return x.cwiseMax(0.0); },
            [&](const Box& s) -> Vec { return clamp_box(x, s.lower, s.upper); },
            [&](const Ball& s) -> Vec {
                const Vec d = x - s.center;
                const double r = d.norm();
                if (r <= s.radius) return x;
                return s.center + d * (s.radius / r);
            },
            [&](const HalfSpace& s) -> Vec {
                const double excess = s.normal.dot(x) - s.offset;
                if (excess <= 0.0) return x;
                return x - s.normal * (excess / s.normal.squaredNorm());
            },
            [&](const Singleton& s) -> Vec { return s.point; },
        },
        v_);
}

std::pair<double, double> ConvexSet::as_interval() const {
    if (dim() != 1) throw InvalidArgument("as_interval requires a one-dimensional set");
    return std::visit(overloaded{
                          [](const FullSpace&) { return std::pair{-kInf, kInf}; },
                          [](const NonnegativeOrthant&) { return std::pair{0.0, kInf}; },
                          [](const Box& s) { return std::pair{s.lower[0], s.upper[0]}; },
                          [](const Ball& s) {
                              return std::pair{s.center[0] - s.radius, s.center[0] + s.radius};
                          },
                          [](const HalfSpace& s) {
                              const double bound = s.offset / s.normal[0];
                              return s.normal[0] > 0.0 ? std::pair{-kInf, bound}
                                                       : std::pair{bound, kInf};
                          },
                          [](const Singleton& s) { return std::pair{s.point[0], s.point[0]}; },
                      },
                      v_);
}

WeightMatrix::WeightMatrix(Mat r0) : r0_(std::move(r0)) {
    if (r0_.rows() != r0_.cols() || r0_.rows() < 1)
        throw InvalidArgument("weight matrix must be square and nonempty");
    if (!r0_.allFinite()) throw InvalidArgument("weight matrix must be finite");
    if (!is_symmetric(r0_, 1e-12)) throw InvalidArgument("weight matrix must be symmetric");
    const EigenRange range = symmetric_eigen_range(r0_);
    if (!(range.min > 0.0)) {
        std::ostringstream os;
        os << "weight matrix must be positive definite (smallest eigenvalue " << range.min << ")";
        throw InvalidArgument(os.str());
    }
    lambda_min_ = range.min;
    lambda_max_ = range.max;
    const Mat off = r0_ - Mat(r0_.diagonal().asDiagonal());
    diagonal_ = max_abs(off) == 0.0;
}

WeightedProjector::WeightedProjector(ConvexSet set, WeightMatrix r)
    : set_(std::move(set)), r_(std::move(r)), kind_(Kind::Iterative) {
    if (r_.dim() != set_.dim()) throw ShapeMismatch("weight and set dimensions disagree");
    const auto& v = set_.variant();
    const int m = set_.dim();
    if (std::holds_alternative<FullSpace>(v)) {
        kind_ = Kind::Identity;
    } else if (const auto* s = std::get_if<Singleton>(&v)) {
        kind_ = Kind::Constant;
        lower_ = s->point;
    } else if (r_.is_diagonal() && std::holds_alternative<Box>(v)) {
        kind_ = Kind::Clamp;
        lower_ = std::get<Box>(v).lower;
        upper_ = std::get<Box>(v).upper;
    } else if (r_.is_diagonal() && std::holds_alternative<NonnegativeOrthant>(v)) {
        kind_ = Kind::Clamp;
        lower_ = Vec::Zero(m);
        upper_ = Vec::Constant(m, kInf);
    } else if (const auto* h = std::get_if<HalfSpace>(&v)) {
        // Minimizer of ||y - x||_R on {<a, y> <= c} is x - t R^{-1} a.
        kind_ = Kind::HalfSpace;
        normal_ = h->normal;
        offset_ = h->offset;
        direction_ = r_.matrix().ldlt().solve(h->normal);
        denom_ = h->normal.dot(direction_);
    }
}

void WeightedProjector::apply(std::span<double> y) const {
    const auto m = static_cast<std::size_t>(set_.dim());
    if (y.size() != m) throw ShapeMismatch("projection input has wrong dimension");
    switch (kind_) {
    case Kind::Identity:
        return;
    case Kind::Constant:
        for (std::size_t j = 0; j < m; ++j) y[j] = lower_[static_cast<Eigen::Index>(j)];
        return;
    case Kind::Clamp:
        for (std::size_t j = 0; j < m; ++j) {
            const auto e = static_cast<Eigen::Index>(j);
            y[j] = std::min(std::max(y[j], lower_[e]), upper_[e]);
        }
        return;
    case Kind::HalfSpace: {
        double excess = -offset_;
        for (std::size_t j = 0; j < m; ++j) excess += normal_[static_cast<Eigen::Index>(j)] * y[j];
        if (excess <= 0.0) return;
        const double t = excess / denom_;
        for (std::size_t j = 0; j < m; ++j) y[j] -= direction_[static_cast<Eigen::Index>(j)] * t;
        return;
    }
    case Kind::Iterative: {
        const Vec x = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(m));
        const Vec out = iterate(x);
        for (std::size_t j = 0; j < m; ++j) y[j] = out[static_cast<Eigen::Index>(j)];
        return;
    }
    }
}

Vec WeightedProjector::operator()(const Vec& x) const {
    Vec y = x;
    apply(std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    return y;
}

Vec WeightedProjector::iterate(const Vec& x) const {
    // Projected gradient on f(y) = 1/2 (y - x)^T R0 (y - x) with step 1/lambda_max.
    const Mat& r0 = r_.matrix();
    const double step = 1.0 / r_.lambda_max();
    Vec y = set_.project(x);
    for (int it = 0; it < kMaxProjectedGradientIters; ++it) {
        Vec next = set_.project(y - step * (r0 * (y - x)));
        const double change = (next - y).norm();
        y = std::move(next);
        if (change <= kProjectedGradientTol * (1.0 + y.norm())) return y;
    }
    std::ostringstream os;
    os << "weighted projection onto " << set_.type_name() << " did not converge in "
       << kMaxProjectedGradientIters << " iterations (condition number " << r_.condition_number()
       << ")";
    throw NonConvergence(os.str(), r_.condition_number());
}

Vec project_weighted(const ConvexSet& set, const Vec& x, const WeightMatrix& r) {
    if (x.size() != set.dim() || r.dim() != set.dim())
        throw ShapeMismatch("weighted projection dimensions disagree");
    return WeightedProjector(set, r)(x);
}

double characterization_residual(const ConvexSet& set, const Vec& x, const Vec& y,
                                 const WeightMatrix& r, std::span<const Vec> probes) {
    const Vec g = r.matrix() * (y - x);
    double worst = -kInf;
    for (const Vec& z : probes) {
        if (!set.contains(z)) throw ProbeNotInSet("probe point is not a member of the set");
        worst = std::max(worst, g.dot(y - z));
    }
    return probes.empty() ? 0.0 : worst;
}

} // namespace mfglab
