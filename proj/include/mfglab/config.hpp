#pragma once

#include "mfglab/mean_field.hpp"
#include "mfglab/population.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfglab {

/// Malformed or incomplete configuration; the message starts with the
/// offending field path (or the line and column of a syntax error).
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct SolverSettings {
    long paths = 20000;
    int degree = 3;
    double theta = 0.5;
    double rho = 0.5;
    double tol_u = 1e-5;
    double tol_z = 0.0;  // 0 selects 1e-4 (1 + |x0|)
    int max_picard = 200;
    int max_outer = 100;
    bool warm_start = true;

    FixedPointConfig fixed_point() const;
};

struct ExperimentSettings {
    std::vector<int> Ns{10, 25, 50, 100, 200, 400, 1000};
    std::vector<int> nash_Ns{25, 50, 100, 200, 400};
    int reps = 64;
    int agents = 100;  // population size for the population subcommand
    std::vector<Vec> constants;  // empty: {0}
    std::vector<double> lambdas{0.0, 0.5, 0.9, 0.95, 0.98, 1.0, 1.02, 1.05, 1.5};
    bool reversed = true;
    int lattice_points = 801;

    std::vector<Deviation> family(int m) const;
};

struct ExperimentConfig {
    ModelSpec model;
    bool strict_h1 = true;
    SolverSettings solver;
    ExperimentSettings experiment;
    std::uint64_t seed = 1;
    /// Empty: MFGLAB_OUT, else "runs".
    std::string output;
    /// Canonical dump of the model and gamma blocks, used to match runs.
    std::string model_json;
};

/// Parses the JSON text of a configuration file.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Parses a control set from its JSON object text.
ConvexSet parse_gamma(const std::string& text, int m);

/// Reads a file into a string; throws IoError.
std::string read_text(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mfglab
