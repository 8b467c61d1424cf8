#pragma once

#include <stdexcept>
#include <string>

namespace nlmodes {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a precondition (dimension mismatch, non-positive step, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A computation could not be carried out: singular or indefinite metric,
/// non-finite state, iteration failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A query fell outside the region where a field or chart is defined.
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A monitored quantity (energy drift, unit speed, residual) left its bound.
class ToleranceError : public Error {
public:
    using Error::Error;
};

}  // namespace nlmodes
