#pragma once

#include <stdexcept>
#include <string>

namespace fuzzytomo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The measurement model cannot explain the data or the state
/// (zero-probability outcome, rank-deficient measurement matrix, ...).
class DegenerateModel : public Error {
public:
    using Error::Error;
};

/// An internal numerical consistency check failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace fuzzytomo
