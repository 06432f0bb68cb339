#pragma once

#include <stdexcept>
#include <string>

namespace bmfim {

/// Base class for all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands disagree on variable count, encoding or convention.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument value is violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Exhaustive enumeration requested beyond the supported variable count.
class EnumerationLimit : public Error {
public:
    using Error::Error;
};

/// Linear algebra failure (indefinite system, non-finite matrix, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace bmfim
