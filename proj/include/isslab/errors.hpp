#pragma once

#include <stdexcept>
#include <string>

namespace isslab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An evaluator returned a non-finite value.
class EvaluationFailure : public Error {
public:
    EvaluationFailure(const std::string& what, double argument)
        : Error(what), argument_(argument) {}
    double argument() const noexcept { return argument_; }

private:
    double argument_;
};

/// Numerical inversion could not bracket the requested value.
class RangeExceeded : public Error {
public:
    using Error::Error;
};

/// A constructed comparison function failed its own class check.
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Dissipative gains that do not satisfy the ISS tail condition.
class NotAnIssPair : public Error {
public:
    using Error::Error;
};

/// Generator with an eigenvalue of nonnegative real part.
class NotExponentiallyStable : public Error {
public:
    NotExponentiallyStable(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace isslab
