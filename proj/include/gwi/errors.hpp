#pragma once

#include <stdexcept>
#include <string>

namespace gwi {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Model parameters violate a structural constraint (negative mass, no
/// critical solution, nu >= delta, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to reach its residual target.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual(residual) {}
    double residual;
};

/// Infinite-product truncation could not reach the requested bound within
/// the factor budget.
class TruncationBudgetExceeded : public Error {
public:
    using Error::Error;
};

/// Coefficient-extraction radius would overflow the rescaling r^{-k}.
class RadiusIllConditioned : public Error {
public:
    using Error::Error;
};

/// Extracted coefficient fell below the negative-mass floor.
class NegativeCoefficient : public Error {
public:
    using Error::Error;
};

/// Tail index queried beyond the stored series length.
class OutOfRange : public Error {
public:
    using Error::Error;
};

/// Window exponents violate the theorem's constraints or give x_lo >= x_hi.
class InfeasibleWindow : public Error {
public:
    using Error::Error;
};

/// Bad or degenerate input to a statistics routine.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace gwi
