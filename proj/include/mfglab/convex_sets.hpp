#pragma once

#include "mfglab/linalg.hpp"

#include <span>
#include <string_view>
#include <variant>

namespace mfglab {

struct FullSpace {
    int dim;
};

struct NonnegativeOrthant {
    int dim;
};

/// Coordinate box; +-infinity bounds give one-sided or free coordinates.
struct Box {
    Vec lower;
    Vec upper;
};

struct Ball {
    Vec center;
    double radius;
};

/// {y : <normal, y> <= offset}
struct HalfSpace {
    Vec normal;
    double offset;
};

struct Singleton {
    Vec point;
};

/// Nonempty closed convex subset of R^m. Construction validates the
/// variant's parameters, so every live instance is a valid set.
class ConvexSet {
public:
    using Variant = std::variant<FullSpace, NonnegativeOrthant, Box, Ball, HalfSpace, Singleton>;

    static ConvexSet full(int dim);
    static ConvexSet orthant(int dim);
    static ConvexSet box(Vec lower, Vec upper);
    static ConvexSet interval(double lower, double upper);
    static ConvexSet ball(Vec center, double radius);
    static ConvexSet halfspace(Vec normal, double offset);
    static ConvexSet singleton(Vec point);

    int dim() const;
    const Variant& variant() const { return v_; }
    std::string_view type_name() const;

    bool contains(const Vec& y, double tol = 1e-10) const;

    /// A canonical member of the set.
    Vec witness() const;

    /// Euclidean nearest point.
    Vec project(const Vec& x) const;

    bool is_full_space() const { return std::holds_alternative<FullSpace>(v_); }
    bool is_singleton() const { return std::holds_alternative<Singleton>(v_); }

    /// For m = 1: the set as a closed interval [lo, hi], possibly unbounded.
    std::pair<double, double> as_interval() const;

private:
    explicit ConvexSet(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// Symmetric positive definite weight R0 defining ||x||_R^2 = x^T R0 x.
class WeightMatrix {
public:
    /// Throws InvalidArgument unless `r0` is symmetric and positive definite.
    explicit WeightMatrix(Mat r0);

    static WeightMatrix identity(int dim) { return WeightMatrix(Mat::Identity(dim, dim)); }

    const Mat& matrix() const { return r0_; }
    int dim() const { return static_cast<int>(r0_.rows()); }
    bool is_diagonal() const { return diagonal_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    double condition_number() const { return lambda_max_ / lambda_min_; }

    double inner(const Vec& a, const Vec& b) const { return a.dot(r0_ * b); }
    double norm_sq(const Vec& a) const { return inner(a, a); }

private:
    Mat r0_;
    bool diagonal_;
    double lambda_min_;
    double lambda_max_;
};

/// Weighted projection onto a fixed (set, R) pair. Closed-form cases (full
/// space, singleton, half-space, separable box or orthant under diagonal R)
/// run in place without allocating; everything else falls back to projected
/// gradient descent.
class WeightedProjector {
public:
    WeightedProjector(ConvexSet set, WeightMatrix r);

    const ConvexSet& set() const { return set_; }
    const WeightMatrix& weight() const { return r_; }

    /// Replaces y by its projection.
    void apply(std::span<double> y) const;
    Vec operator()(const Vec& x) const;

private:
    enum class Kind { Identity, Constant, Clamp, HalfSpace, Iterative };

    Vec iterate(const Vec& x) const;

    ConvexSet set_;
    WeightMatrix r_;
    Kind kind_;
    Vec lower_;
    Vec upper_;
    Vec normal_;
    Vec direction_;
    double offset_ = 0.0;
    double denom_ = 1.0;
};

inline Vec project(const ConvexSet& set, const Vec& x) { return set.project(x); }

/// Nearest point of `set` to `x` in the R-weighted norm.
Vec project_weighted(const ConvexSet& set, const Vec& x, const WeightMatrix& r);

/// max over probes z of <R0 (y - x), y - z>; nonpositive iff y is the weighted
/// projection of x (restricted to the probe set).
double characterization_residual(const ConvexSet& set, const Vec& x, const Vec& y,
                                 const WeightMatrix& r, std::span<const Vec> probes);

} // namespace mfglab
