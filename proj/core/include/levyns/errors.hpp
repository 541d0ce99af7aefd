#pragma once

#include <stdexcept>
#include <string>

namespace levyns {

/// Invalid run configuration: bad parameters, unresolvable grids, unknown
/// catalog entries. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// API misuse: mismatched lengths, foreign grids, off-grid lags.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Numerical failure of a solve or eigen-decomposition. Maps to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mass matrix lost positive definiteness. Unreachable while the density
/// stays inside its certified bounds.
class DensityBoundViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Non-finite Galerkin coefficients.
class BlowUpError : public NumericalError {
public:
    BlowUpError(const std::string& what, double time)
        : NumericalError(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace levyns
