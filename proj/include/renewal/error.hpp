#pragma once

#include <stdexcept>

namespace renewal {

/// Bad caller input: out-of-range indices, empty grids, unknown names.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structurally malformed problem data (envelopes, sign constraints, config
/// syntax).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that cannot produce a trustworthy number: no spectral point,
/// negative kernel weight, overflow, degenerate mean.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace renewal
