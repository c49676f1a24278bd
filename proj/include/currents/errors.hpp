#pragma once

#include <stdexcept>
#include <string>

namespace currents {

// Argument outside the domain of a function (zero radius, bad order, bad mass).
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A series or table ran out of terms before meeting its tolerance.
struct AccuracyError : std::runtime_error {
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

// Oscillatory or adaptive quadrature could not certify its tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// The boundary action sent a point to the deleted point at infinity.
struct PointAtInfinity : std::runtime_error {
    explicit PointAtInfinity(const std::string& what) : std::runtime_error(what) {}
};

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// Bad user configuration (CLI flags, partitions, suite names).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace currents
