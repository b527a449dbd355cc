#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

// Base for everything the library throws on purpose. The C API maps each
// subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stretch, radius or field outside the admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Φ,11 <= 0: the Euler-Lagrange equation cannot be put in explicit form.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A solver could not produce a usable answer at all (as opposed to a
// result flagged unconverged).
class SolverError : public Error {
 public:
  using Error::Error;
};

// The cavitation indicator is not monotone across a critical-λ bracket.
class AmbiguityError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace cavity
