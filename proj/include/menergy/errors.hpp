#pragma once

#include <stdexcept>
#include <string>

namespace menergy {

/// Raised when an operation's inputs violate its preconditions.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Two points coincide (or nearly so) where a distinct pair is required.
class DegeneratePairError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// File could not be read or written, or its contents violate the schema.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace menergy
