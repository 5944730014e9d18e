#pragma once

#include <stdexcept>
#include <string>

namespace oemsim {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A parameter set violates one of its invariants.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class SingularityError : public Error {
public:
  using Error::Error;
};

/// Fixed-point iteration did not settle.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Drift matrix is not Hurwitz (or the eigensolver failed to tell).
class InstabilityError : public Error {
public:
  using Error::Error;
};

class NonPhysicalError : public Error {
public:
  using Error::Error;
};

/// Time integration ran past its horizon without becoming stationary.
class HorizonError : public Error {
public:
  using Error::Error;
};

/// Malformed sweep definition or unknown preset.
class SpecError : public Error {
public:
  using Error::Error;
};

/// Unreadable or schema-violating parameter file.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace oemsim
