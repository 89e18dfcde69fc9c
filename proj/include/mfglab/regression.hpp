#pragma once

#include "mfglab/linalg.hpp"

#include <span>
#include <vector>

namespace mfglab {

/// Full monomial basis in `dim` variables up to total degree `degree`, in
/// graded order: the constant first, then the linear terms in coordinate
/// order, then higher degrees.
class MonomialBasis {
public:
    MonomialBasis(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    const std::vector<std::vector<int>>& exponents() const { return exponents_; }

    /// Index of the monomial xi_coord.
    int linear_index(int coord) const { return 1 + coord; }

    void eval(const double* xi, double* out) const;

private:
    int dim_;
    int degree_;
    std::vector<std::vector<int>> exponents_;
};

/// Affine change of variables xi = (x - shift) / scale used before the basis.
struct Standardization {
    std::vector<double> shift;
    std::vector<double> scale;

    void apply(const double* x, double* xi) const;
};

/// Least-squares projection onto the basis at one grid node: the design
/// matrix and the factorized ridge-regularized normal equations.
class RegressionDesign {
public:
    RegressionDesign(const MonomialBasis& basis, std::span<const double> x, long paths, double ridge);

    const Standardization& standardization() const { return norm_; }
    bool rank_deficient() const { return rank_deficient_; }
    long paths() const { return paths_; }

    /// Regresses `r` target columns (row-major, paths x r); returns the
    /// basis x r coefficient matrix and writes fitted values if requested.
    Mat fit(std::span<const double> y, int r, std::span<double> fitted = {}) const;

private:
    const MonomialBasis* basis_;
    long paths_;
    Standardization norm_;
    std::vector<double> phi_;  // paths x L, row-major
    Eigen::LDLT<Mat> ldlt_;
    bool rank_deficient_ = false;
};

/// Evaluates sum_l coef(l, c) * basis_l(xi(x)) for every output column c.
void evaluate_fit(const MonomialBasis& basis, const Standardization& norm, const Mat& coef,
                  const double* x, double* out);

} // namespace mfglab
