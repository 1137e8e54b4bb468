#include "sktap/amp_iter.hpp"

#include "sktap/rng.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace sktap {

DisorderMatrix sample_disorder(Index n, Seed seed) {
  if (n < 2) throw DomainError("sample_disorder: n must be >= 2");
  DisorderMatrix g;
  g.seed = seed;
  g.entries.resize(n, n);
  const RandomStream rs(seed, Stream::disorder);
  const auto un = static_cast<std::uint64_t>(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      g.entries(i, j) = rs.normal(static_cast<std::uint64_t>(i) * un + static_cast<std::uint64_t>(j));
    }
  }
  return g;
}

SymmetrizedDisorder symmetrize(const Matrix& g) {
  if (g.rows() != g.cols()) throw DomainError("symmetrize: matrix must be square");
  const Index n = g.rows();
  SymmetrizedDisorder s;
  s.entries.resize(n, n);
  const double c = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double v = (g(i, j) + g(j, i)) * c;
      s.entries(i, j) = v;
      s.entries(j, i) = v;
    }
  }
  return s;
}

SymmetrizedDisorder symmetrize(const DisorderMatrix& g) { return symmetrize(g.entries); }

AmpState amp_init(const ModelParams& params, const RsSolution& rs, DisorderMatrix g, int k_max) {
  params.validate();
  if (k_max < 2) throw DomainError("amp_init: k_max must be >= 2");
  if (g.n() < 2 || g.entries.cols() != g.n()) throw DomainError("amp_init: disorder must be square, n >= 2");
  AmpState st;
  st.k = 1;
  st.params = params;
  st.q = rs.q;
  st.g_k = std::move(g.entries);
  st.schedule = gamma_schedule(params, rs.q, k_max);
  const Index n = st.n();
  const double o = st.orientation();
  st.phis.push_back(Vector::Constant(n, o));
  st.m_k = Vector::Constant(n, o * std::sqrt(rs.q));
  st.h_k = Vector::Constant(n, std::atanh(o * std::sqrt(rs.q)));
  return st;
}

AmpState amp_step(AmpState st) {
  const int k = st.k;
  if (k < 1) throw DomainError("amp_step: k must be >= 1");
  if (static_cast<int>(st.schedule.size()) < k) {
    throw DomainError("amp_step: schedule too short for step " + std::to_string(k));
  }
  const Index n = st.n();
  const double sn = std::sqrt(static_cast<double>(n));
  const Vector& phi = st.phis.back();

  Vector xi = (st.g_k * phi) / sn;
  Vector eta = (st.g_k.transpose() * phi) / sn;
  Vector zeta = (xi + eta) / std::sqrt(2.0);

  const auto& sch = st.schedule;
  const double beta = st.params.beta;
  Vector field = Vector::Constant(n, st.params.h);
  for (int s = 1; s <= k - 1; ++s) field.noalias() += (beta * sch.gamma(s)) * st.zetas[s - 1];
  const double room = std::max(0.0, st.q - sch.gamma_sq(k - 1));
  field.noalias() += (beta * std::sqrt(room)) * zeta;

  Vector m = field.array().tanh().matrix();

  // modified Gram-Schmidt with one reorthogonalization pass
  Vector v = m;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& p : st.phis) v -= inner(p, v) * p;
  }
  const double vn = norm(v);
  if (!(vn > 1e-12 * std::max(norm(m), 1e-300))) {
    throw NumericalError("amp_step: Gram-Schmidt degenerate at step " + std::to_string(k));
  }
  v /= vn;

  // g^(k+1) = g^(k) - N^{-1/2} [xi phi^T + phi eta^T - <phi, xi> phi phi^T]
  const double c = inner(phi, xi);
  st.g_k.noalias() -= (xi / sn) * phi.transpose();
  st.g_k.noalias() -= (phi / sn) * eta.transpose();
  st.g_k.noalias() += (c / sn) * phi * phi.transpose();

  st.zetas.push_back(std::move(zeta));
  st.xi = std::move(xi);
  st.eta = std::move(eta);
  st.h_k = std::move(field);
  st.m_k = std::move(m);
  st.phis.push_back(std::move(v));
  st.k = k + 1;
  return st;
}

AmpState amp_advance(AmpState st, int k) {
  if (k < st.k) throw DomainError("amp_advance: target step precedes current step");
  while (st.k < k) st = amp_step(std::move(st));
  return st;
}

Matrix projection_P(const AmpState& st) {
  const Index n = st.n();
  Matrix P = Matrix::Zero(n, n);
  for (const Vector& p : st.phis) P.noalias() += p * p.transpose();
  P /= static_cast<double>(n);
  return P;
}

AmpDiagnostics diagnostics(const AmpState& st, const RsSolution&) {
  if (st.k < 2) throw DomainError("diagnostics: requires k >= 2");
  AmpDiagnostics d;
  d.norm_m_sq = norm_sq(st.m_k);
  for (const Vector& p : st.phis) d.gamma_overlaps.push_back(inner(p, st.m_k));
  const Vector& phi = st.phis.back();
  const Vector xi = (st.g_k * phi) / std::sqrt(static_cast<double>(st.n()));
  d.phi_xi_overlap = inner(phi, xi);
  return d;
}

void write_state_csv(const AmpState& st, std::ostream& os) {
  os << "i,h,m,phi_k\n";
  char buf[128];
  const Vector& phi = st.phis.back();
  for (Index i = 0; i < st.n(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g\n", static_cast<long>(i), st.h_k[i], st.m_k[i], phi[i]);
    os << buf;
  }
}

}  // namespace sktap
