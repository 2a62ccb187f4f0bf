#pragma once

#include <stdexcept>
#include <string>

namespace incgraph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but has no usable content (all-zero matrix, zero
/// singular value under a non-positive exponent, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise invalid numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Event stream arrived out of chronological order.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (maps to CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing data file (maps to CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace incgraph
