#pragma once

#include "mfglab/errors.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mfglab {

/// Dense (time, path, component) array. Time-major so that one grid node
/// across all paths is contiguous.
class PathArray {
public:
    PathArray() = default;
    PathArray(int steps, long paths, int dim, double fill = 0.0)
        : steps_(steps), paths_(paths), dim_(dim),
          data_(static_cast<std::size_t>(steps) * static_cast<std::size_t>(paths) *
                    static_cast<std::size_t>(dim),
                fill) {}

    int steps() const { return steps_; }
    long paths() const { return paths_; }
    int dim() const { return dim_; }

    double* at(int k, long i) { return data_.data() + offset(k, i); }
    const double* at(int k, long i) const { return data_.data() + offset(k, i); }
    double& operator()(int k, long i, int j) { return data_[offset(k, i) + static_cast<std::size_t>(j)]; }
    double operator()(int k, long i, int j) const { return data_[offset(k, i) + static_cast<std::size_t>(j)]; }

    /// All paths at node k.
    std::span<double> node(int k) {
        return {data_.data() + offset(k, 0), static_cast<std::size_t>(paths_) * dim_};
    }
    std::span<const double> node(int k) const {
        return {data_.data() + offset(k, 0), static_cast<std::size_t>(paths_) * dim_};
    }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

    bool same_shape(const PathArray& o) const {
        return steps_ == o.steps_ && paths_ == o.paths_ && dim_ == o.dim_;
    }

    friend bool operator==(const PathArray&, const PathArray&) = default;

private:
    std::size_t offset(int k, long i) const {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(paths_) +
                static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(dim_);
    }

    int steps_ = 0;
    long paths_ = 0;
    int dim_ = 0;
    std::vector<double> data_;
};

/// Deterministic mean path z on the grid nodes 0..K, row-major (K+1) x n.
class MeanPath {
public:
    MeanPath() = default;
    MeanPath(int nodes, int dim, double fill = 0.0)
        : nodes_(nodes), dim_(dim), data_(static_cast<std::size_t>(nodes) * dim, fill) {}

    int nodes() const { return nodes_; }
    int dim() const { return dim_; }
    double* at(int k) { return data_.data() + static_cast<std::size_t>(k) * dim_; }
    const double* at(int k) const { return data_.data() + static_cast<std::size_t>(k) * dim_; }
    double& operator()(int k, int j) { return data_[static_cast<std::size_t>(k) * dim_ + j]; }
    double operator()(int k, int j) const { return data_[static_cast<std::size_t>(k) * dim_ + j]; }
    const std::vector<double>& raw() const { return data_; }

    /// max_k max_j |a - b|
    static double max_abs_diff(const MeanPath& a, const MeanPath& b);

    friend bool operator==(const MeanPath&, const MeanPath&) = default;

private:
    int nodes_ = 0;
    int dim_ = 0;
    std::vector<double> data_;
};

inline double MeanPath::max_abs_diff(const MeanPath& a, const MeanPath& b) {
    if (a.nodes_ != b.nodes_ || a.dim_ != b.dim_) throw ShapeMismatch("mean paths differ in shape");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data_.size(); ++i) {
        const double d = a.data_[i] - b.data_[i];
        worst = std::max(worst, d < 0 ? -d : d);
    }
    return worst;
}

} // namespace mfglab
