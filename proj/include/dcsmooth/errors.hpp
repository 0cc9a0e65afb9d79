#pragma once

#include <stdexcept>
#include <string>

namespace dcsmooth {

/// Invalid argument: bad parameter value, wrong dimension, malformed input.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smoothing parameter outside the range where the envelope is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Backtracking exhausted its shrink budget without meeting the Armijo test.
class LineSearchFailure : public std::runtime_error {
 public:
  LineSearchFailure(const std::string& what, int iteration = 0)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// A value or gradient became NaN/Inf during a solve.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// A brute-force verifier could not produce a trustworthy answer.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcsmooth
