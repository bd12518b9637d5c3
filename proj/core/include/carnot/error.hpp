#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structure-constant table or spec file is malformed.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Group law requested on a group of step > 3.
class UnsupportedStepError : public Error {
 public:
  using Error::Error;
};

// A point (or stencil point) lies outside the domain of a field.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Nothing to test: empty mask, every sample skipped, too few samples.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A sampled value is NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace carnot
