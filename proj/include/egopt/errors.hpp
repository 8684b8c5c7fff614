#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace egopt {

/// A linear-algebra operation could not be completed (e.g. a Cholesky
/// factorization that stays indefinite after the jitter escalation).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A regression design matrix is rank deficient.
class SingularDesignError : public std::runtime_error {
 public:
  SingularDesignError(const std::string& what, std::vector<int> dependent_columns)
      : std::runtime_error(what), dependent_columns_(std::move(dependent_columns)) {}

  const std::vector<int>& dependent_columns() const { return dependent_columns_; }

 private:
  std::vector<int> dependent_columns_;
};

}  // namespace egopt
