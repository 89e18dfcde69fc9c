#pragma once

#include "mfglab/convex_sets.hpp"
#include "mfglab/model.hpp"

#include <random>
#include <vector>

namespace mfglab::testing {

/// Scalar instance builder; every coefficient constant in time.
struct Scalar {
    double A = 0.0, B = 1.0, D = 0.0, F = 0.0, b = 0.0, sigma = 0.0;
    double Q = 1.0, R = 1.0, G = 0.0;
    double T = 1.0, x0 = 1.0;
    int K = 100;
    ConvexSet gamma = ConvexSet::full(1);

    ModelSpec spec() const {
        ModelSpec s;
        s.n = 1;
        s.m = 1;
        s.x0 = Vec::Constant(1, x0);
        s.grid = {T, K};
        auto c = [](double v) { return Mat::Constant(1, 1, v); };
        s.coeffs = Coefficients::constant(K, c(A), c(F), c(B), c(D), Vec::Constant(1, b), Vec::Constant(1, sigma),
                                          c(Q), c(R), c(G));
        s.gamma = gamma;
        return s;
    }
    Model model() const { return Model(spec()); }
};

inline Vec random_vec(std::mt19937_64& rng, int m, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Vec v(m);
    for (int i = 0; i < m; ++i) v[i] = g(rng);
    return v;
}

/// Random SPD weight with condition number up to about 50.
inline WeightMatrix random_weight(std::mt19937_64& rng, int m, bool diagonal) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    if (diagonal) {
        Vec d(m);
        for (int i = 0; i < m; ++i) d[i] = u(rng);
        return WeightMatrix(d.asDiagonal().toDenseMatrix());
    }
    Mat a = Mat::Zero(m, m);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = g(rng);
    Mat r = a * a.transpose() / m + 0.1 * Mat::Identity(m, m);
    r = 0.5 * (r + r.transpose());
    return WeightMatrix(r);
}

/// One random instance of variant `kind` (0..5) in dimension m.
inline ConvexSet random_set(std::mt19937_64& rng, int kind, int m) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    switch (kind) {
    case 0:
        return ConvexSet::full(m);
    case 1:
        return ConvexSet::orthant(m);
    case 2: {
        Vec lo(m), hi(m);
        for (int i = 0; i < m; ++i) {
            const double a = u(rng), b = u(rng);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
            if (u(rng) > 0.8) lo[i] = -kInf;
            if (u(rng) > 0.8) hi[i] = kInf;
        }
        return ConvexSet::box(lo, hi);
    }
    case 3:
        return ConvexSet::ball(random_vec(rng, m, 0.5), 0.1 + std::abs(u(rng)));
    case 4: {
        Vec a = random_vec(rng, m, 1.0);
        if (a.norm() < 1e-3) a[0] = 1.0;
        return ConvexSet::halfspace(a, u(rng));
    }
    default:
        return ConvexSet::singleton(random_vec(rng, m, 1.0));
    }
}

} // namespace mfglab::testing
