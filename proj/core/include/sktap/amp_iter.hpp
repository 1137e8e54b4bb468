#pragma once

#include "sktap/rs_core.hpp"
#include "sktap/types.hpp"

#include <iosfwd>
#include <vector>

namespace sktap {

struct DisorderMatrix {
  Matrix entries;
  Seed seed = 0;
  Index n() const { return entries.rows(); }
};

// gbar = (g + g^T) / sqrt(2)
struct SymmetrizedDisorder {
  Matrix entries;
  Index n() const { return entries.rows(); }
};

inline constexpr int kDefaultKMax = 12;

// Row-major draw order: entry (i, j) is normal draw i * n + j of the disorder stream.
DisorderMatrix sample_disorder(Index n, Seed seed);
SymmetrizedDisorder symmetrize(const DisorderMatrix& g);
SymmetrizedDisorder symmetrize(const Matrix& g);

struct AmpState {
  int k = 1;
  ModelParams params;
  double q = 0.0;
  Matrix g_k;                 // deflated disorder g^(k)
  std::vector<Vector> phis;   // phi^(1..k), <phi_s, phi_t> = delta_st
  std::vector<Vector> zetas;  // zeta^(1..k-1)
  Vector xi;                  // xi^(k-1); empty at k = 1
  Vector eta;                 // eta^(k-1); empty at k = 1
  Vector h_k;                 // field h^(k); atanh(m^(1)) at k = 1
  Vector m_k;                 // magnetization m^(k)
  GammaSchedule schedule;

  Index n() const { return g_k.rows(); }
  // sign(h): the first direction is sign(h) * 1
  double orientation() const { return params.h > 0.0 ? 1.0 : -1.0; }
};

AmpState amp_init(const ModelParams& params, const RsSolution& rs, DisorderMatrix g, int k_max = kDefaultKMax);

// Consumes the state at step k and returns step k + 1. Throws NumericalError
// when the new magnetization is linearly dependent on the current phi basis.
AmpState amp_step(AmpState state);

// Steps until state.k == k.
AmpState amp_advance(AmpState state, int k);

// P^(k) = N^{-1} sum_s phi_s phi_s^T
Matrix projection_P(const AmpState& state);

struct AmpDiagnostics {
  double norm_m_sq = 0.0;
  std::vector<double> gamma_overlaps;  // <phi_s, m^(k)>, s = 1..k
  double phi_xi_overlap = 0.0;         // <phi^(k), xi^(k)> with xi^(k) = N^{-1/2} g^(k) phi^(k)
  double residual_norm = 0.0;          // ||Delta^(k)||, left for tap_functional
};

AmpDiagnostics diagnostics(const AmpState& state, const RsSolution& rs);

// Columns: i,h,m,phi_k (one row per site, 17 significant digits).
void write_state_csv(const AmpState& state, std::ostream& os);

}  // namespace sktap
