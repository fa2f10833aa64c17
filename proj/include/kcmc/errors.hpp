#pragma once

#include <stdexcept>
#include <string>

namespace kcmc {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside an operation's mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Point lies past the r = 0 singularity (X^2 - T^2 < -2M).
class BeyondSingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

// Jet or slope that is not spacelike.
class NotSpacelikeError : public DomainError {
public:
    using DomainError::DomainError;
};

// Root finder called without a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

// No TSS-CMC slice exists for the requested (H, c, branch).
class NoSliceError : public DomainError {
public:
    using DomainError::DomainError;
};

class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double best_estimate, double error_estimate)
        : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

}  // namespace kcmc
