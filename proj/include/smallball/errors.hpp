#pragma once

#include <stdexcept>
#include <string>

namespace smallball {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Problem-document errors. `kind` distinguishes the failure so callers and
// tests do not have to match on message text.
struct ParseError : Error {
  enum class Kind {
    malformed_document,
    missing_key,
    unknown_key,
    unknown_family,
    non_positive_rho,
    dimension_mismatch,
    bad_value,
  };

  ParseError(Kind k, const std::string& what) : Error(what), kind(k) {}
  Kind kind;
};

// A hypothesis of one of the supported theorems fails (sigma = 0, radius
// above the admissible bound, vanishing derivative precondition, ...).
// The CLI maps this to exit code 2.
struct GateError : Error {
  explicit GateError(const std::string& what) : Error(what) {}
};

// Numerical failure: vanishing field along an iteration path, internal
// consistency assertion failure, and similar. CLI exit code 3.
struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace smallball
