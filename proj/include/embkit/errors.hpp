#pragma once

#include <stdexcept>

namespace embkit {

// Base class for all embkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or structurally inconsistent input (files, records, schemas).
struct ParseError : Error {
    using Error::Error;
};

// An operation was called with arguments violating its preconditions.
struct ArgumentError : Error {
    using Error::Error;
};

// Invalid or unsatisfiable configuration, e.g. empty vocabulary after filtering.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical failure: training divergence, degenerate samples, undefined statistics.
struct NumericError : Error {
    using Error::Error;
};

// Not enough shared vocabulary to carry out an operation.
struct CoverageError : Error {
    using Error::Error;
};

}  // namespace embkit
