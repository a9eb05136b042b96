#pragma once

#include <stdexcept>
#include <string>

namespace spherelab {

// Every failure raised by the library derives from Error. The CLI maps
// SchemaError to exit code 2 and every other Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Argument outside an operation's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// Point too close to a projection pole or excluded point.
class PoleError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "pole"; }
};

// Immersion fails to be immersive, or a principal radius / flat point was hit.
class DegeneracyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degeneracy"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

// An operation's geometric hypothesis does not hold (not hemispherical,
// not locally convex, not embedded, ...).
class HypothesisError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "hypothesis"; }
};

// Sampling too coarse for a stable answer.
class ResolutionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resolution"; }
};

class SchemaError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "schema"; }
};

}  // namespace spherelab
