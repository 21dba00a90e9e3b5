#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hyfermi {

/// A physical or structural invariant of an input type was violated
/// (negative potential sample, non-closed Fermi shell, bad cutoff parameters).
class InvariantViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative or adaptive procedure did not reach its tolerance.
/// Carries the last residual and, when available, the residual history.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, std::vector<double> history = {})
        : std::runtime_error(what), residual_(residual), history_(std::move(history)) {}

    double residual() const noexcept { return residual_; }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    double residual_;
    std::vector<double> history_;
};

}  // namespace hyfermi
