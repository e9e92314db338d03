#pragma once

#include <stdexcept>

namespace lsilab {

// Base type for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by the caller.
struct PreconditionViolation final : Error {
    using Error::Error;
};

// Malformed input file (measure CSV, subset-values CSV, reproducer).
struct ParseError final : Error {
    using Error::Error;
};

}  // namespace lsilab
