#pragma once

#include <stdexcept>
#include <string>

namespace hklab {

/// Invalid argument or precondition violation (unknown vertex, r > R, overlapping sets, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A query reached the frontier of a finite truncation of an infinite graph.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solver failure: non-convergence, iteration cap, residual too large.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Generator or profile request above the configured size cap.
class CapExceededError : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace hklab
