#include "sktap/tap_functional.hpp"

#include "sktap/rng.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>

namespace sktap {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void require_dims(const SymmetrizedDisorder& gbar, const Magnetization& m, const char* who) {
  if (gbar.entries.rows() != gbar.entries.cols() || gbar.n() != m.size()) {
    throw DomainError(std::string(who) + ": dimension mismatch");
  }
}

}  // namespace

Magnetization Magnetization::from_values(Vector m) {
  Magnetization out;
  out.y_.resize(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    if (!(std::abs(m[i]) < 1.0)) throw DomainError("Magnetization: entries must satisfy |m_i| < 1");
    out.y_[i] = std::atanh(m[i]);
  }
  out.m_ = std::move(m);
  return out;
}

Magnetization Magnetization::from_field(Vector y) {
  Magnetization out;
  for (Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw DomainError("Magnetization: field must be finite");
  }
  out.m_ = y.array().tanh().matrix();
  out.y_ = std::move(y);
  return out;
}

double Magnetization::inv_one_minus_sq(Index i) const {
  const double c = std::cosh(y_[i]);
  return c * c;
}

double entropy_I(double x) {
  if (!(std::abs(x) < 1.0)) throw DomainError("entropy_I: |x| must be < 1");
  const double a = std::abs(x);
  if (a > 1.0 - 1e-8) {
    // d = 1 - |x| is exact here; (1+|x|)/2 log(2-d) + (d/2) log d
    const double d = 1.0 - a;
    return 0.5 * (2.0 - d) * std::log(2.0 - d) + 0.5 * d * std::log(d);
  }
  return 0.5 * (1.0 + a) * std::log1p(a) + 0.5 * (1.0 - a) * std::log1p(-a);
}

double entropy_from_field(double y) {
  // I(tanh y) = y tanh y - log cosh y = log 2 - log1p(e) - 2|y| e / (1 + e), e = exp(-2|y|)
  const double a = std::abs(y);
  const double e = std::exp(-2.0 * a);
  return std::log(2.0) - std::log1p(e) - 2.0 * a * e / (1.0 + e);
}

TapBreakdown tap_free_energy(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p) {
  require_dims(gbar, m, "tap_free_energy");
  const Index n = m.size();
  const double dn = static_cast<double>(n);
  const Vector& x = m.values();
  TapBreakdown t;
  const Vector gx = gbar.entries * x;
  const double quad = x.dot(gx);
  const double diag = (gbar.entries.diagonal().array() * x.array().square()).sum();
  t.interaction = p.beta / std::sqrt(dn) * 0.5 * (quad - diag);
  t.field = p.h * x.sum();
  const double u = 1.0 - x.squaredNorm() / dn;
  t.onsager = p.beta * p.beta / 4.0 * dn * u * u;
  double ent = 0.0;
  for (Index i = 0; i < n; ++i) ent += entropy_from_field(m.field()[i]);
  t.entropy = -ent;
  t.total = t.interaction + t.field + t.onsager + t.entropy;
  t.per_site = t.total / dn;
  return t;
}

TapResidual tap_residual(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p, double q) {
  require_dims(gbar, m, "tap_residual");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("tap_residual: q must lie in [0,1)");
  const double dn = static_cast<double>(m.size());
  TapResidual r;
  r.delta = m.field() - Vector::Constant(m.size(), p.h) - (p.beta / std::sqrt(dn)) * (gbar.entries * m.values()) +
            (p.beta * p.beta * (1.0 - q)) * m.values();
  r.norm = norm(r.delta);
  return r;
}

Vector tap_gradient(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p) {
  require_dims(gbar, m, "tap_gradient");
  const double dn = static_cast<double>(m.size());
  const Vector& x = m.values();
  const double c = p.beta / std::sqrt(dn);
  const double u = 1.0 - x.squaredNorm() / dn;
  Vector g = c * (gbar.entries * x);
  g.array() -= c * gbar.entries.diagonal().array() * x.array();
  g.array() += p.h;
  g -= (p.beta * p.beta * u) * x;
  g -= m.field();
  return g;
}

HessianMatrix hessian(const SymmetrizedDisorder& gbar, const Magnetization& m, const ModelParams& p) {
  require_dims(gbar, m, "hessian");
  const Index n = m.size();
  const double dn = static_cast<double>(n);
  const Vector& x = m.values();
  const double c = p.beta / std::sqrt(dn);
  const double r = 2.0 * p.beta * p.beta / dn;
  const double onsager_diag = -p.beta * p.beta * (1.0 - x.squaredNorm() / dn);
  HessianMatrix H;
  H.entries.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) H.entries(i, j) = c * gbar.entries(i, j) + r * (x[i] * x[j]);
    H.entries(j, j) = onsager_diag - m.inv_one_minus_sq(j) + r * x[j] * x[j];
  }
  return H;
}

Magnetization sign_magnetization(const Vector& v, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("sign_magnetization: alpha must lie in [0,1)");
  if (v.size() == 0 || std::abs(v.norm() - 1.0) > 1e-8) {
    throw DomainError("sign_magnetization: v must have unit l2 norm");
  }
  Vector m(v.size());
  for (Index i = 0; i < v.size(); ++i) m[i] = v[i] >= 0.0 ? alpha : -alpha;
  return Magnetization::from_values(std::move(m));
}

double rayleigh_prediction(double beta, double a) {
  if (!(a >= 0.0 && a < 1.0)) throw DomainError("rayleigh_prediction: alpha^2 must lie in [0,1)");
  return 2.0 * beta - beta * beta * (1.0 - a) - 1.0 / (1.0 - a) + 4.0 * beta * beta * a / kPi;
}

OptimalAlpha optimal_alpha(double beta) {
  if (!(beta > 0.0)) throw DomainError("optimal_alpha: beta must be positive");
  const double c = 1.0 / std::sqrt(1.0 + 4.0 / kPi);
  OptimalAlpha o;
  o.alpha_sq = std::max(0.0, 1.0 - c / beta);
  o.prediction = rayleigh_prediction(beta, o.alpha_sq);
  return o;
}

double beta_zero() { return 0.5 * kPi * (std::sqrt(1.0 + 4.0 / kPi) - 1.0); }

Magnetization sample_independent_magnetization(const ModelParams& p, double q, Index n, Seed seed) {
  if (n < 1) throw DomainError("sample_independent_magnetization: n must be >= 1");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("sample_independent_magnetization: q must lie in [0,1)");
  const RandomStream rs(seed, Stream::magnetization);
  Vector y = rs.normal_vector(n);
  y = (p.beta * std::sqrt(q)) * y;
  y.array() += p.h;
  return Magnetization::from_field(std::move(y));
}

Magnetization state_magnetization(const AmpState& st) {
  if (st.k == 1) return Magnetization::from_values(st.m_k);
  return Magnetization::from_field(st.h_k);
}

Matrix b_matrix(const AmpState& st) {
  const Index n = st.n();
  const double dn = static_cast<double>(n);
  const double b = st.params.beta;
  Matrix B = (2.0 * b * b / dn) * st.m_k * st.m_k.transpose();
  for (int s = 1; s <= st.k - 1; ++s) {
    const Vector& z = st.zetas[s - 1];
    const Vector& f = st.phis[s - 1];
    B.noalias() += (b / dn) * z * f.transpose();
    B.noalias() += (b / dn) * f * z.transpose();
  }
  return B;
}

DecompositionReport hessian_decomposition(const AmpState& st, const HessianMatrix& hess, const ModelParams& p,
                                          double q) {
  const Index n = st.n();
  if (hess.n() != n) throw DomainError("hessian_decomposition: dimension mismatch");
  const double dn = static_cast<double>(n);
  const Magnetization m = state_magnetization(st);
  DecompositionReport rep;
  rep.a_diag.resize(n);
  for (Index i = 0; i < n; ++i) rep.a_diag[i] = -m.inv_one_minus_sq(i);

  const Matrix B = b_matrix(st);
  Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double top = ev.maxCoeff();
  rep.b_rank = 0;
  if (top > 0.0) {
    for (Index i = 0; i < ev.size(); ++i) rep.b_rank += ev[i] > 1e-8 * top ? 1 : 0;
  }

  const double c = p.beta / std::sqrt(dn) / std::sqrt(2.0);
  Matrix R = hess.entries - B;
  R.noalias() -= c * st.g_k;
  R.noalias() -= c * st.g_k.transpose();
  R.diagonal() -= rep.a_diag;
  R.diagonal().array() += p.beta * p.beta * (1.0 - q);
  rep.residual_frobenius = R.norm();
  return rep;
}

}  // namespace sktap
