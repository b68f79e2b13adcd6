#pragma once

#include <stdexcept>
#include <string>

namespace vortexlens {

/// Argument outside the mathematical domain of an operation (e.g. a Landau
/// width for zero field).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation point outside the region where a profile or solution is defined.
class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Numerical integrator or quadrature could not meet its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Landau decomposition left more than the allowed residual weight.
class BasisTooSmall : public std::runtime_error {
 public:
  BasisTooSmall(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace vortexlens
