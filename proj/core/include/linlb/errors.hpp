#pragma once

#include <stdexcept>
#include <string>

namespace linlb {

// Root of every error thrown by the library. Callers that only care about
// "something about the request was invalid" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class NoChildError : public Error {
 public:
  using Error::Error;
};

class RootError : public Error {
 public:
  using Error::Error;
};

// Requested work exceeds an exhaustive-enumeration or storage limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ParityError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A randomized construction did not succeed within its retry allowance.
class ConstructionFailed : public Error {
 public:
  using Error::Error;
};

// The instance does not have the structure a certificate builder relies on.
class VariantError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class ModeError : public Error {
 public:
  using Error::Error;
};

class SpanError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace linlb
