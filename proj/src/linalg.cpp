#include "mfglab/linalg.hpp"

namespace mfglab {

EigenRange symmetric_eigen_range(const Mat& m) {
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
    const Vec& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

bool all_finite(const Mat& m) {
    return m.allFinite();
}

double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Mat& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = max_abs(m);
    return max_abs(m - m.transpose()) <= rel_tol * (scale > 0.0 ? scale : 1.0);
}

} // namespace mfglab
