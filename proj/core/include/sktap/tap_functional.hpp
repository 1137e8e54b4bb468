#pragma once

#include "sktap/amp_iter.hpp"
#include "sktap/rs_core.hpp"
#include "sktap/types.hpp"

namespace sktap {

// Magnetization stored together with its field y = atanh(m). Quantities that
// blow up at |m| = 1 (1/(1-m^2), I(m)) are evaluated from the field, so a
// field-defined magnetization stays usable even when tanh(y) rounds to +-1.
class Magnetization {
 public:
  Magnetization() = default;
  // Throws DomainError unless every |m_i| < 1.
  static Magnetization from_values(Vector m);
  static Magnetization from_field(Vector y);

  const Vector& values() const { return m_; }
  const Vector& field() const { return y_; }
  Index size() const { return m_.size(); }
  // 1 / (1 - m_i^2) = cosh^2(y_i)
  double inv_one_minus_sq(Index i) const;

 private:
  Vector m_;
  Vector y_;
};

// I(x) = ((1+x)/2) log(1+x) + ((1-x)/2) log(1-x); DomainError for |x| >= 1.
double entropy_I(double x);
// I(tanh y), exact for every finite y.
double entropy_from_field(double y);

struct TapBreakdown {
  double interaction = 0.0;  // beta N^{-1/2} sum_{i<j} gbar_ij m_i m_j
  double field = 0.0;        // h sum m_i
  double onsager = 0.0;      // beta^2 N (1 - ||m||^2)^2 / 4
  double entropy = 0.0;      // -sum I(m_i)
  double total = 0.0;
  double per_site = 0.0;
};

TapBreakdown tap_free_energy(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p);

struct TapResidual {
  Vector delta;
  double norm = 0.0;  // under <x,y> = N^{-1} sum x_i y_i
};

// Delta = atanh(m) - h 1 - beta N^{-1/2} gbar m + beta^2 (1-q) m, with the full
// product gbar m (diagonal included).
TapResidual tap_residual(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p, double q);

// TAP gradient: beta N^{-1/2} (gbar m)_i - beta N^{-1/2} gbar_ii m_i + h - beta^2 (1 - ||m||^2) m_i - atanh(m_i)
Vector tap_gradient(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p);

struct HessianMatrix {
  Matrix entries;
  Index n() const { return entries.rows(); }
};

HessianMatrix hessian(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p);

// m_i = alpha sign(v_i), sign(0) = +1. v must have unit l2 norm.
Magnetization sign_magnetization(const Vector& v, double alpha);

// 2 beta - beta^2 (1 - a) - 1/(1 - a) + 4 beta^2 a / pi at a = alpha^2
double rayleigh_prediction(double beta, double alpha_sq);

struct OptimalAlpha {
  double alpha_sq = 0.0;
  double prediction = 0.0;
};

// alpha^2 = 1 - beta^{-1} (1 + 4/pi)^{-1/2}, clamped at 0.
OptimalAlpha optimal_alpha(double beta);

// Root of the optimal prediction in beta: (pi/2)(sqrt(1 + 4/pi) - 1).
double beta_zero();

// m_i = tanh(h + beta sqrt(q) Z_i), Z from the magnetization stream of seed.
Magnetization sample_independent_magnetization(const ModelParams& p, double q, Index n, Seed seed);

struct DecompositionReport {
  Vector a_diag;
  int b_rank = 0;
  double residual_frobenius = 0.0;
};

// B^(k) = 2 beta^2 m (x) m + beta sum_{s<k} (zeta_s (x) phi_s + phi_s (x) zeta_s).
Matrix b_matrix(const AmpState& state);

// Residual H - [beta N^{-1/2} gbar^(k) + A + B - beta^2 (1-q) 1] with gbar^(k)
// the symmetrized deflated disorder of the state.
DecompositionReport hessian_decomposition(const AmpState& state, const HessianMatrix& hess, const ModelParams& p,
                                          double q);

// Magnetization of the state, using its field for k >= 2.
Magnetization state_magnetization(const AmpState& state);

}  // namespace sktap
