#pragma once

#include "sktap/quadrature.hpp"
#include "sktap/types.hpp"

#include <cmath>
#include <vector>

namespace sktap {

struct RsSolution {
  ModelParams params;
  double q = 0.0;
  double rs_value = 0.0;
  double at_value = 0.0;
  double plefka2_value = 0.0;
  // |q - E tanh^2(h + beta sqrt(q) Z)| at the returned q
  double residual = 0.0;
  int iterations = 0;

  bool at_holds() const { return at_value <= 1.0; }
};

struct GammaSchedule {
  std::vector<double> gammas;
  std::vector<double> rhos;
  std::vector<double> gamma_sq_partials;
  // Set when q - Gamma^2_{k-1} fell below 1e-14 and the remaining gammas were zeroed.
  bool frozen = false;
  int frozen_from = 0;  // first frozen index k (1-based)

  std::size_t size() const { return gammas.size(); }
  double gamma(int k) const { return gammas.at(static_cast<std::size_t>(k - 1)); }
  double rho(int k) const { return rhos.at(static_cast<std::size_t>(k - 1)); }
  // Gamma^2_k, with Gamma^2_0 = 0.
  double gamma_sq(int k) const;
};

struct PlefkaValues {
  double p1 = 0.0;
  double p2 = 0.0;
  bool in_p1() const { return p1 < 1.0; }
  bool in_p2() const { return p2 < 1.0; }
};

inline constexpr double kDefaultSolveTol = 1e-12;
inline constexpr int kMaxSolveIterations = 200;
inline constexpr double kScheduleFreeze = 1e-14;

// E f(h + beta sqrt(q) Z) with the adapted rule.
template <class F>
double field_expectation(const ModelParams& p, double q, F&& f, int order = kDefaultGaussHermiteOrder) {
  const double sd = p.beta * std::sqrt(q);
  const QuadratureRule rule = gaussian_field_rule(p.h, sd, order);
  return rule.expect([&](double z) { return f(p.h + sd * z); });
}

// F(q) = E tanh^2(h + beta sqrt(q) Z)
double overlap_map(const ModelParams& p, double q);

// RS functional evaluated at an arbitrary q in [0,1].
double rs_functional(const ModelParams& p, double q);

RsSolution solve_q(const ModelParams& p, double tol = kDefaultSolveTol);

double at_value(const ModelParams& p, double q);
double plefka2_limit_value(const ModelParams& p, double q);

// psi(t) = E tanh(h + b sqrt(t) Z + b sqrt(q-t) Z') tanh(h + b sqrt(t) Z + b sqrt(q-t) Z'')
double psi(double t, const ModelParams& p, double q);

// gamma/rho recursion. Computed for |h|; the iteration orients its first
// direction along sign(h), which leaves the recursion invariant.
GammaSchedule gamma_schedule(const ModelParams& p, double q, int k_max);

PlefkaValues plefka_values(const Vector& m, const ModelParams& p);

}  // namespace sktap
