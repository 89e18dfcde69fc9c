#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfglab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Weighted projection did not reach its stopping tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double condition_number)
        : Error(what), condition_number_(condition_number) {}
    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

class ProbeNotInSet : public Error {
public:
    using Error::Error;
};

class ControlNotFeasible : public Error {
public:
    using Error::Error;
};

class SingularInnerMatrix : public Error {
public:
    using Error::Error;
};

class LatticeTooNarrow : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    NonFiniteState(const std::string& what, int step, long path)
        : Error(what), step_(step), path_(path) {}
    int step() const noexcept { return step_; }
    long path() const noexcept { return path_; }

private:
    int step_;
    long path_;
};

class RegressionRankDeficient : public Error {
public:
    using Error::Error;
};

/// Picard iteration exhausted its budget; carries the per-iteration control change.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, std::vector<double> log)
        : Error(what), log_(std::move(log)) {}
    const std::vector<double>& log() const noexcept { return log_; }

private:
    std::vector<double> log_;
};

/// Mean-field fixed point exhausted its outer budget.
class OuterNotConverged : public Error {
public:
    OuterNotConverged(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

class InfeasibleDeviation : public Error {
public:
    using Error::Error;
};

class MismatchedNoise : public Error {
public:
    using Error::Error;
};

} // namespace mfglab
