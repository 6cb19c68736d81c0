#pragma once

#include <stdexcept>
#include <string>

namespace kdvinv {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the admissible domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

class SingularSystem : public Error {
public:
  using Error::Error;
};

// A time-stepping solve produced non-finite values.
class DivergedSolution : public Error {
public:
  using Error::Error;
};

// A fixed-point iteration failed to contract. The message names the
// hypothesis (smallness of data / horizon, weight of the norm) that is
// most likely violated.
class NoContraction : public Error {
public:
  using Error::Error;
};

// The measurement sensitivity (determinant, psi_0 or omega_0'(R)) dips
// below the configured floor.
class NondegeneracyError : public Error {
public:
  using Error::Error;
};

// A hard precondition of an inverse problem is violated.
class PreconditionError : public Error {
public:
  PreconditionError(std::string hypothesis, const std::string& detail)
      : Error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
  std::string hypothesis_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace kdvinv
