#pragma once

#include <stdexcept>
#include <string>

namespace freqcorr
{

// Argument outside the mathematical or physical domain of an operation.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Caller broke a documented precondition (e.g. symmetric path on an
// asymmetric spectrum).
class ContractViolation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

// Quadrature could not reach the requested accuracy on the given grid.
class AccuracyError : public std::runtime_error
{
public:
    AccuracyError(const std::string& what, double estimate, double tolerance)
        : std::runtime_error(what + " (estimated error " + std::to_string(estimate) +
                             ", tolerance " + std::to_string(tolerance) + ")"),
          estimate_(estimate),
          tolerance_(tolerance)
    {
    }

    double estimate() const noexcept { return estimate_; }
    double tolerance() const noexcept { return tolerance_; }

private:
    double estimate_;
    double tolerance_;
};

// A least-squares fit failed (no convergence, or input the model cannot
// describe).
class FitFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace freqcorr
