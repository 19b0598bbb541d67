#pragma once

#include <stdexcept>
#include <string>

namespace elrp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed instance document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A data invariant is broken. `field()` names the offending field path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class UnknownStation : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IterationLimit : public Error {
 public:
  IterationLimit(const std::string& what, double lower_bound, double upper_bound)
      : Error(what), lower_bound_(lower_bound), upper_bound_(upper_bound) {}
  [[nodiscard]] double lower_bound() const { return lower_bound_; }
  [[nodiscard]] double upper_bound() const { return upper_bound_; }

 private:
  double lower_bound_;
  double upper_bound_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace elrp
