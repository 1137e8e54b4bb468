#include "sktap/rs_core.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace sktap {

namespace {

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double sech(double y) { return 1.0 / std::cosh(y); }

constexpr double kQMax = 1.0 - 1e-12;

}  // namespace

double GammaSchedule::gamma_sq(int k) const {
  if (k <= 0) return 0.0;
  return gamma_sq_partials.at(static_cast<std::size_t>(k - 1));
}

double overlap_map(const ModelParams& p, double q) {
  return field_expectation(p, q, [](double y) {
    const double t = std::tanh(y);
    return t * t;
  });
}

double rs_functional(const ModelParams& p, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("rs_functional: q must lie in [0,1]");
  const double e = field_expectation(p, q, [](double y) { return log_cosh(y); });
  return e + p.beta * p.beta * (1.0 - q) * (1.0 - q) / 4.0;
}

RsSolution solve_q(const ModelParams& p, double tol) {
  p.validate();
  if (!(tol > 0.0)) throw DomainError("solve_q: tol must be positive");

  auto f = [&](double q) { return overlap_map(p, q) - q; };
  RsSolution sol;
  sol.params = p;

  double lo = 0.0, hi = kQMax;
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_hi >= 0.0) {
    // Root above 1 - 1e-12: the field saturates every spin.
    sol.q = hi;
    sol.residual = std::abs(f_hi);
  } else if (f_lo <= 0.0) {
    sol.q = 0.0;
    sol.residual = std::abs(f_lo);
  } else {
    std::uintmax_t iters = kMaxSolveIterations;
    auto done = [](double a, double b) { return std::abs(b - a) <= 4.0 * 2.220446049250313e-16; };
    const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, iters);
    const double ra = std::abs(f(bracket.first));
    const double rb = std::abs(f(bracket.second));
    sol.q = ra <= rb ? bracket.first : bracket.second;
    sol.residual = std::min(ra, rb);
    sol.iterations = static_cast<int>(iters);
    if (sol.residual >= tol) {
      throw ConvergenceError("solve_q: residual above tolerance", sol.residual, sol.iterations);
    }
  }
  if (sol.residual >= tol) {
    throw ConvergenceError("solve_q: residual above tolerance", sol.residual, sol.iterations);
  }
  sol.rs_value = rs_functional(p, sol.q);
  sol.at_value = at_value(p, sol.q);
  sol.plefka2_value = plefka2_limit_value(p, sol.q);
  return sol;
}

double at_value(const ModelParams& p, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("at_value: q must lie in [0,1)");
  const double e = field_expectation(p, q, [](double y) {
    const double s = sech(y);
    const double s2 = s * s;
    return s2 * s2;
  });
  return p.beta * p.beta * e;
}

double plefka2_limit_value(const ModelParams& p, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("plefka2_limit_value: q must lie in [0,1)");
  // tanh^2 - tanh^4 = tanh^2 sech^2
  const double e = field_expectation(p, q, [](double y) {
    const double t = std::tanh(y);
    const double s = sech(y);
    return t * t * s * s;
  });
  return 2.0 * p.beta * p.beta * e;
}

double psi(double t, const ModelParams& p, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("psi: q must lie in [0,1)");
  const double slack = 1e-15;
  if (!(t >= -slack && t <= q + slack)) throw DomainError("psi: t must lie in [0,q]");
  t = std::clamp(t, 0.0, q);
  // psi(t) = q - E_Z Var_{Z'}[tanh(h + b sqrt(t) Z + b sqrt(q-t) Z')];
  // the conditional variance form keeps psi(q) = q and psi <= q exactly.
  const double outer_sd = p.beta * std::sqrt(t);
  const double inner_sd = p.beta * std::sqrt(q - t);
  const QuadratureRule outer = gaussian_field_rule(p.h, outer_sd, kPsiGaussHermiteOrder);
  const double mean_var = outer.expect([&](double z) {
    const double y = p.h + outer_sd * z;
    const QuadratureRule inner = gaussian_field_rule(y, inner_sd, kPsiGaussHermiteOrder);
    const double mean = inner.expect([&](double zz) { return std::tanh(y + inner_sd * zz); });
    return inner.expect([&](double zz) {
      const double d = std::tanh(y + inner_sd * zz) - mean;
      return d * d;
    });
  });
  return std::clamp(q - mean_var, 0.0, q);
}

GammaSchedule gamma_schedule(const ModelParams& p, double q, int k_max) {
  if (k_max < 1) throw DomainError("gamma_schedule: k_max must be >= 1");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("gamma_schedule: q must lie in [0,1)");
  const ModelParams pa{p.beta, std::abs(p.h)};
  GammaSchedule s;
  s.gammas.reserve(k_max);
  s.rhos.reserve(k_max);
  s.gamma_sq_partials.reserve(k_max);

  const double g1 = field_expectation(pa, q, [](double y) { return std::tanh(y); });
  s.gammas.push_back(g1);
  s.rhos.push_back(std::sqrt(q) * g1);
  s.gamma_sq_partials.push_back(g1 * g1);

  for (int k = 2; k <= k_max; ++k) {
    const double gsq_prev = s.gamma_sq_partials.back();
    const double rho = psi(std::clamp(s.rhos.back(), 0.0, q), pa, q);
    const double room = q - gsq_prev;
    double gk = 0.0;
    if (room < -1e-12) {
      throw NumericalError("gamma_schedule: q - Gamma^2_" + std::to_string(k - 1) + " = " +
                           std::to_string(room) + " is negative");
    }
    if (s.frozen || room < kScheduleFreeze) {
      if (!s.frozen) {
        s.frozen = true;
        s.frozen_from = k;
      }
    } else {
      gk = (rho - gsq_prev) / std::sqrt(room);
    }
    s.gammas.push_back(gk);
    s.rhos.push_back(rho);
    s.gamma_sq_partials.push_back(gsq_prev + gk * gk);
  }
  return s;
}

PlefkaValues plefka_values(const Vector& m, const ModelParams& p) {
  if (m.size() == 0) throw DomainError("plefka_values: empty magnetization");
  double s1 = 0.0, s2 = 0.0;
  for (Index i = 0; i < m.size(); ++i) {
    const double x = m[i];
    if (!(std::abs(x) < 1.0)) throw DomainError("plefka_values: |m_i| must be < 1");
    const double x2 = x * x;
    s1 += (1.0 - x2) * (1.0 - x2);
    s2 += x2 - x2 * x2;
  }
  const double n = static_cast<double>(m.size());
  const double b2 = p.beta * p.beta;
  return {b2 * s1 / n, 2.0 * b2 * s2 / n};
}

}  // namespace sktap
