#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace mfglab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct EigenRange {
    double min;
    double max;
};

/// Extreme eigenvalues of the symmetric part of `m`.
EigenRange symmetric_eigen_range(const Mat& m);

bool all_finite(const Mat& m);

/// Largest absolute entry, 0 for empty matrices.
double max_abs(const Mat& m);

bool is_symmetric(const Mat& m, double rel_tol);

} // namespace mfglab
