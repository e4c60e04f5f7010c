#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etmc {

/// Iterative routine failed to converge.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, std::size_t iterations)
        : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
          iterations_(iterations) {}

    std::size_t iterations() const noexcept { return iterations_; }

private:
    std::size_t iterations_;
};

/// A matrix geometric series sum_w (b*K)^w was requested with rho(b*K) >= 1.
class DivergentSeries : public std::runtime_error {
public:
    DivergentSeries(double b, double rho)
        : std::runtime_error("divergent series: rho(" + std::to_string(b) + " * P1E) = " +
                             std::to_string(rho) + " >= 1"),
          b_(b), rho_(rho) {}

    double b() const noexcept { return b_; }
    double rho() const noexcept { return rho_; }

private:
    double b_;
    double rho_;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numeric error raised inside a simulated trial, tagged with the timestep.
class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace etmc
