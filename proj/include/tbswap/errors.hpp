#pragma once

#include <stdexcept>
#include <string>

namespace tbswap {

// Base of everything the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Linear algebra or probability consistency failure (non-SPD matrix,
// inclusion-exclusion result significantly negative, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOpError : public Error {
 public:
  using Error::Error;
};

class ValidityError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double attainable)
      : Error(what), attainable_(attainable) {}
  double attainable() const { return attainable_; }

 private:
  double attainable_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbswap
