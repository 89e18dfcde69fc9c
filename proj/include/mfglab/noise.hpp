#pragma once

#include "mfglab/paths.hpp"

#include <cstdint>
#include <random>

namespace mfglab {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based stream seed: distinct (seed, domain, a, b) tuples give
/// statistically independent generator seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                          std::uint64_t b = 0);

/// Scalar Brownian increments, one independent stream per path.
class NoiseBank {
public:
    /// Regenerates bit-identically from (seed, paths, steps, dt).
    static NoiseBank generate(std::uint64_t seed, long paths, int steps, double dt);

    std::uint64_t seed() const { return seed_; }
    long paths() const { return increments_.paths(); }
    int steps() const { return increments_.steps(); }
    double dt() const { return dt_; }

    double dw(int k, long i) const { return increments_(k, i, 0); }
    const PathArray& increments() const { return increments_; }

    /// Sums `factor` consecutive increments: the same Brownian paths seen on
    /// a grid `factor` times coarser.
    NoiseBank coarsen(int factor) const;

    bool same_source(const NoiseBank& o) const {
        return seed_ == o.seed_ && paths() == o.paths() && steps() == o.steps() && dt_ == o.dt_ &&
               coarsened_ == o.coarsened_;
    }

private:
    std::uint64_t seed_ = 0;
    double dt_ = 0.0;
    int coarsened_ = 1;
    PathArray increments_;
};

/// Fills `out` with `steps` increments of a standard Brownian motion on a
/// grid of step dt, drawn from the stream identified by `stream_seed`.
void brownian_increments(std::uint64_t stream_seed, int steps, double dt, double* out);

} // namespace mfglab
