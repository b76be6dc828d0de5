#pragma once

#include <stdexcept>
#include <string>

namespace donormag {

// Precondition and argument errors use std::invalid_argument directly. The
// types below mark failures a caller may want to handle separately.

/// An iterative numerical method did not converge.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The requested operation does not apply to this spin species.
class UnsupportedSpecies : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A qubit frequency below the gap has no real flux solution.
class OutOfBand : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fit basis functions are (numerically) collinear on the data grid.
class DegenerateBasis : public std::invalid_argument {
 public:
  DegenerateBasis(const std::string& what, double condition)
      : std::invalid_argument(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace donormag
