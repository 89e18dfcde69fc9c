#include "mfglab/noise.hpp"

#include "mfglab/errors.hpp"

#include <cmath>

namespace mfglab {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(domain + 0x1234567ULL));
    h = mix64(h ^ mix64(a + 0x2545f4914f6cdd1dULL));
    h = mix64(h ^ mix64(b + 0x9e3779b97f4a7c15ULL));
    return h;
}

void brownian_increments(std::uint64_t stream_seed, int steps, double dt, double* out) {
    std::mt19937_64 engine(stream_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(dt);
    for (int k = 0; k < steps; ++k) out[k] = scale * normal(engine);
}

NoiseBank NoiseBank::generate(std::uint64_t seed, long paths, int steps, double dt) {
    if (paths < 1 || steps < 1 || !(dt > 0.0)) throw InvalidArgument("noise bank needs positive paths, steps and dt");
    NoiseBank bank;
    bank.seed_ = seed;
    bank.dt_ = dt;
    bank.increments_ = PathArray(steps, paths, 1);
    std::vector<double> buf(static_cast<std::size_t>(steps));
    for (long i = 0; i < paths; ++i) {
        brownian_increments(derive_seed(seed, 1, static_cast<std::uint64_t>(i)), steps, dt, buf.data());
        for (int k = 0; k < steps; ++k) bank.increments_(k, i, 0) = buf[static_cast<std::size_t>(k)];
    }
    return bank;
}

NoiseBank NoiseBank::coarsen(int factor) const {
    if (factor < 1 || steps() % factor != 0) throw InvalidArgument("coarsening factor must divide the step count");
    NoiseBank out;
    out.seed_ = seed_;
    out.dt_ = dt_ * factor;
    out.coarsened_ = coarsened_ * factor;
    out.increments_ = PathArray(steps() / factor, paths(), 1);
    for (int k = 0; k < out.steps(); ++k) {
        for (long i = 0; i < paths(); ++i) {
            double s = 0.0;
            for (int f = 0; f < factor; ++f) s += increments_(k * factor + f, i, 0);
            out.increments_(k, i, 0) = s;
        }
    }
    return out;
}

} // namespace mfglab
