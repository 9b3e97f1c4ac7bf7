#pragma once

#include <stdexcept>
#include <string>

namespace vecset {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension or shape mismatch, out-of-range index, bad config.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A vector whose norm is too small for cosine to be defined.
class DegenerateVector : public Error {
 public:
  using Error::Error;
};

/// Duplicate set id.
class Conflict : public Error {
 public:
  using Error::Error;
};

/// Query cardinality for which no long candidate vectors were materialized.
class UnsupportedCardinality : public Error {
 public:
  using Error::Error;
};

/// Operation not allowed in the current lifecycle state (e.g. sealing twice).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents or I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace vecset
