#pragma once

#include <stdexcept>
#include <string>

namespace jumpconv {

/// Argument outside the domain of an operation (negative rate, t > horizon, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hypothesis required by a report mode does not hold
/// (exponent range, contraction certificate).
class HypothesisError : public std::domain_error {
 public:
  HypothesisError(std::string hypothesis, const std::string& detail)
      : std::domain_error("hypothesis violated: " + hypothesis + " (" + detail + ")"),
        hypothesis_(std::move(hypothesis)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

}  // namespace jumpconv
