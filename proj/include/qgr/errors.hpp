#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qgr {

// Anything that is a failure of the numerics rather than of the caller.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public NumericalError {
 public:
  explicit RangeError(const std::string& what, double where = 0.0)
      : NumericalError(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

class SingularIntegrand : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
 public:
  explicit DomainError(const std::string& what, double where = 0.0)
      : NumericalError(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OverflowError : public NumericalError {
 public:
  OverflowError(const std::string& what, double where)
      : NumericalError(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class UnstableInversion : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qgr
