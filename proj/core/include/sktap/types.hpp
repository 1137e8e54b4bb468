#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sktap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Seed = std::uint64_t;

// Input outside the domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: degenerate Gram-Schmidt, negative schedule increment, ...
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative method stopped at its iteration cap.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations);
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

// Smallest accepted beta; the beta -> 0 limits are probed from here.
inline constexpr double kMinBeta = 1e-8;

struct ModelParams {
  double beta = 1.0;
  double h = 0.5;

  // Throws DomainError unless beta >= kMinBeta, h != 0 and both finite.
  static ModelParams make(double beta, double h);
  void validate() const;
};

// <x, y> = N^{-1} sum x_i y_i
double inner(const Vector& x, const Vector& y);
// ||x||^2 = <x, x>
double norm_sq(const Vector& x);
double norm(const Vector& x);

}  // namespace sktap
