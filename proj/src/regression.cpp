#include "mfglab/regression.hpp"

#include "mfglab/errors.hpp"
#include "mfglab/parallel.hpp"

#include <cmath>
#include <functional>

namespace mfglab {

namespace {

constexpr long kChunk = 4096;

void enumerate(int dim, int total, int coord, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
    if (coord == dim - 1) {
        cur[static_cast<std::size_t>(coord)] = total;
        out.push_back(cur);
        return;
    }
    for (int e = total; e >= 0; --e) {
        cur[static_cast<std::size_t>(coord)] = e;
        enumerate(dim, total - e, coord + 1, cur, out);
    }
}

} // namespace

MonomialBasis::MonomialBasis(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 1) throw InvalidArgument("basis dimension must be positive");
    if (degree < 1) throw InvalidArgument("basis degree must be at least 1");
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    for (int total = 0; total <= degree; ++total) enumerate(dim, total, 0, cur, exponents_);
}

void MonomialBasis::eval(const double* xi, double* out) const {
    // powers[j * (degree + 1) + e] = xi_j^e
    double powers[64 * 8];
    const int stride = degree_ + 1;
    std::vector<double> heap;
    double* pw = powers;
    if (dim_ * stride > 64 * 8) {
        heap.resize(static_cast<std::size_t>(dim_ * stride));
        pw = heap.data();
    }
    for (int j = 0; j < dim_; ++j) {
        pw[j * stride] = 1.0;
        for (int e = 1; e <= degree_; ++e) pw[j * stride + e] = pw[j * stride + e - 1] * xi[j];
    }
    for (std::size_t l = 0; l < exponents_.size(); ++l) {
        double v = 1.0;
        const auto& ex = exponents_[l];
        for (int j = 0; j < dim_; ++j) {
            if (ex[static_cast<std::size_t>(j)]) v *= pw[j * stride + ex[static_cast<std::size_t>(j)]];
        }
        out[l] = v;
    }
}

void Standardization::apply(const double* x, double* xi) const {
    for (std::size_t j = 0; j < shift.size(); ++j) xi[j] = (x[j] - shift[j]) / scale[j];
}

RegressionDesign::RegressionDesign(const MonomialBasis& basis, std::span<const double> x, long paths,
                                   double ridge)
    : basis_(&basis), paths_(paths) {
    const int d = basis.dim();
    const int L = basis.size();
    if (paths < 1 || x.size() != static_cast<std::size_t>(paths) * d)
        throw ShapeMismatch("regression input has wrong shape");

    // Column means and standard deviations, chunked in a fixed order.
    const long chunks = chunk_count(paths, kChunk);
    std::vector<double> part(static_cast<std::size_t>(chunks * d * 2), 0.0);
    parallel_chunks(paths, kChunk, [&](long c, long begin, long end) {
        double* s = part.data() + c * d * 2;
        for (long i = begin; i < end; ++i) {
            for (int j = 0; j < d; ++j) {
                const double v = x[static_cast<std::size_t>(i * d + j)];
                s[j] += v;
            }
        }
    });
    norm_.shift.assign(static_cast<std::size_t>(d), 0.0);
    norm_.scale.assign(static_cast<std::size_t>(d), 1.0);
    for (long c = 0; c < chunks; ++c) {
        for (int j = 0; j < d; ++j) norm_.shift[static_cast<std::size_t>(j)] += part[static_cast<std::size_t>(c * d * 2 + j)];
    }
    for (int j = 0; j < d; ++j) norm_.shift[static_cast<std::size_t>(j)] /= static_cast<double>(paths);
    parallel_chunks(paths, kChunk, [&](long c, long begin, long end) {
        double* s = part.data() + c * d * 2 + d;
        for (int j = 0; j < d; ++j) s[j] = 0.0;
        for (long i = begin; i < end; ++i) {
            for (int j = 0; j < d; ++j) {
                const double v = x[static_cast<std::size_t>(i * d + j)] - norm_.shift[static_cast<std::size_t>(j)];
                s[j] += v * v;
            }
        }
    });
    for (int j = 0; j < d; ++j) {
        double ss = 0.0;
        for (long c = 0; c < chunks; ++c) ss += part[static_cast<std::size_t>(c * d * 2 + d + j)];
        const double sd = std::sqrt(ss / static_cast<double>(paths));
        const double mag = std::abs(norm_.shift[static_cast<std::size_t>(j)]);
        // Degenerate (deterministic) coordinates keep unit scale.
        norm_.scale[static_cast<std::size_t>(j)] = sd > 1e-12 * std::max(1.0, mag) ? sd : 1.0;
    }

    phi_.assign(static_cast<std::size_t>(paths) * L, 0.0);
    std::vector<Mat> grams(static_cast<std::size_t>(chunks));
    parallel_chunks(paths, kChunk, [&](long c, long begin, long end) {
        std::vector<double> xi(static_cast<std::size_t>(d));
        Mat g = Mat::Zero(L, L);
        for (long i = begin; i < end; ++i) {
            norm_.apply(x.data() + i * d, xi.data());
            double* row = phi_.data() + i * L;
            basis.eval(xi.data(), row);
            for (int a = 0; a < L; ++a) {
                for (int b = 0; b <= a; ++b) g(a, b) += row[a] * row[b];
            }
        }
        grams[static_cast<std::size_t>(c)] = std::move(g);
    });
    Mat gram = Mat::Zero(L, L);
    for (const auto& g : grams) gram += g;
    gram /= static_cast<double>(paths);
    for (int a = 0; a < L; ++a) {
        for (int b = 0; b < a; ++b) gram(b, a) = gram(a, b);
        if (a > 0) gram(a, a) += ridge;  // intercept unpenalized
    }
    if (!gram.allFinite()) throw RegressionRankDeficient("regression normal equations are not finite");
    ldlt_.compute(gram);
    const Vec diag = ldlt_.vectorD();
    rank_deficient_ = diag.minCoeff() <= 1e-9 * std::max(1.0, diag.maxCoeff());
}

Mat RegressionDesign::fit(std::span<const double> y, int r, std::span<double> fitted) const {
    const int L = basis_->size();
    if (y.size() != static_cast<std::size_t>(paths_) * r) throw ShapeMismatch("regression target has wrong shape");
    const long chunks = chunk_count(paths_, kChunk);
    std::vector<Mat> parts(static_cast<std::size_t>(chunks));
    parallel_chunks(paths_, kChunk, [&](long c, long begin, long end) {
        Mat rhs = Mat::Zero(L, r);
        for (long i = begin; i < end; ++i) {
            const double* row = phi_.data() + i * L;
            const double* yi = y.data() + i * r;
            for (int a = 0; a < L; ++a) {
                for (int col = 0; col < r; ++col) rhs(a, col) += row[a] * yi[col];
            }
        }
        parts[static_cast<std::size_t>(c)] = std::move(rhs);
    });
    Mat rhs = Mat::Zero(L, r);
    for (const auto& p : parts) rhs += p;
    rhs /= static_cast<double>(paths_);
    Mat coef = ldlt_.solve(rhs);
    if (!coef.allFinite()) throw RegressionRankDeficient("regression coefficients are not finite");
    if (!fitted.empty()) {
        if (fitted.size() != y.size()) throw ShapeMismatch("fitted buffer has wrong shape");
        parallel_chunks(paths_, kChunk, [&](long, long begin, long end) {
            for (long i = begin; i < end; ++i) {
                const double* row = phi_.data() + i * L;
                for (int col = 0; col < r; ++col) {
                    double v = 0.0;
                    for (int a = 0; a < L; ++a) v += row[a] * coef(a, col);
                    fitted[static_cast<std::size_t>(i * r + col)] = v;
                }
            }
        });
    }
    return coef;
}

void evaluate_fit(const MonomialBasis& basis, const Standardization& norm, const Mat& coef,
                  const double* x, double* out) {
    const int d = basis.dim();
    const int L = basis.size();
    double xi_buf[16];
    double row_buf[256];
    std::vector<double> xi_heap;
    std::vector<double> row_heap;
    double* xi = xi_buf;
    double* row = row_buf;
    if (d > 16) {
        xi_heap.resize(static_cast<std::size_t>(d));
        xi = xi_heap.data();
    }
    if (L > 256) {
        row_heap.resize(static_cast<std::size_t>(L));
        row = row_heap.data();
    }
    norm.apply(x, xi);
    basis.eval(xi, row);
    for (Eigen::Index col = 0; col < coef.cols(); ++col) {
        double v = 0.0;
        for (int a = 0; a < L; ++a) v += row[a] * coef(a, col);
        out[col] = v;
    }
}

} // namespace mfglab
