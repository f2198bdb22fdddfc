#pragma once

#include <stdexcept>
#include <string>

namespace vgs {

/// Caller broke a documented precondition (shape mismatch, bad range, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. log of a negative).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A time integration produced a non-finite value.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double time)
        : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// An iterative solver ran out of iterations.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// A linear solve hit a (numerically) singular pivot.
class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal self-check failed; indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Not enough usable data for a statistical fit.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vgs
