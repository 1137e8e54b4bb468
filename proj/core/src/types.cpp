#include "sktap/types.hpp"

#include <cmath>

namespace sktap {

ConvergenceError::ConvergenceError(const std::string& what, double last_residual, int iterations)
    : NumericalError(what + " (last residual " + std::to_string(last_residual) + " after " +
                     std::to_string(iterations) + " iterations)"),
      last_residual_(last_residual),
      iterations_(iterations) {}

ModelParams ModelParams::make(double beta, double h) {
  ModelParams p{beta, h};
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (!std::isfinite(beta) || !std::isfinite(h)) throw DomainError("beta and h must be finite");
  if (beta < kMinBeta) throw DomainError("beta must be >= 1e-8, got " + std::to_string(beta));
  if (h == 0.0) throw DomainError("h must be nonzero");
}

double inner(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DomainError("inner: dimension mismatch");
  if (x.size() == 0) return 0.0;
  return x.dot(y) / static_cast<double>(x.size());
}

double norm_sq(const Vector& x) { return inner(x, x); }

double norm(const Vector& x) { return std::sqrt(norm_sq(x)); }

}  // namespace sktap
