#pragma once

#include <stdexcept>
#include <string>

namespace itev {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or non-evaluable user input (contrast data, vector sizes).
class InputError : public Error {
public:
    using Error::Error;
};

/// Parameters outside their admissible range (grid size, widths, tolerances).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A stated precondition of an estimate or experiment does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Bookkeeping inconsistency that indicates a bug rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

/// A - lambda M is singular to working precision: lambda sits on (or next to) the spectrum.
class NearSingularError : public Error {
public:
    NearSingularError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// A quadrature node of a contour landed on the spectrum.
class ContourGrazeError : public Error {
public:
    ContourGrazeError(const std::string& what, double suggested_radius)
        : Error(what), suggested_radius_(suggested_radius) {}
    double suggested_radius() const noexcept { return suggested_radius_; }

private:
    double suggested_radius_;
};

/// Every probe direction carried spectral content; the subspace may be truncated.
class ProbeSaturatedError : public Error {
public:
    using Error::Error;
};

/// A state carries no mass where the cutoff is below one.
class DegenerateStateError : public Error {
public:
    using Error::Error;
};

/// Constant index n = 1: both fields obey the same equation and every k is a root.
class DegenerateContrastError : public Error {
public:
    using Error::Error;
};

/// ||p - m|| * Gamma(m) >= 1, so the continuity bound does not apply.
class BoundNotApplicableError : public Error {
public:
    using Error::Error;
};

}  // namespace itev
