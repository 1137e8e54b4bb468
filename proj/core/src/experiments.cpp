#include "sktap/experiments.hpp"

#include "sktap/amp_iter.hpp"
#include "sktap/free_prob.hpp"
#include "sktap/rng.hpp"
#include "sktap/rs_core.hpp"
#include "sktap/spectra.hpp"
#include "sktap/tap_functional.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#ifndef SKTAP_VERSION
#define SKTAP_VERSION "0.0.0"
#endif

namespace sktap {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPhaseHMax = 60.0;
constexpr double kPhaseHMin = 1e-9;

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

ExperimentRecord make_record(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentRecord rec;
  rec.config = cfg;
  rec.version = version_string();
  return rec;
}

template <class Fn>
void run_replicas(ExperimentRecord& rec, Fn&& fn) {
  const ExperimentConfig& cfg = rec.config;
  rec.rows.assign(cfg.replicas, ReplicaRow{});
  const int workers = resolve_workers(cfg);
  parallel_for(cfg.replicas, workers, [&](int r) {
    ReplicaRow row;
    row.replica = r;
    row.seed = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
    try {
      row.values = fn(row.seed);
      if (row.values.size() != rec.columns.size()) throw std::logic_error("replica produced wrong column count");
      for (double v : row.values) {
        if (!std::isfinite(v)) throw NumericalError("non-finite observable");
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.values.clear();
    }
    rec.rows[r] = std::move(row);
  });
}

void warn_beyond_at(ExperimentRecord& rec, const RsSolution& rs) {
  if (rs.at_value > 1.0) {
    rec.warnings.push_back("at_value = " + std::to_string(rs.at_value) +
                           " > 1: AMP guarantees only hold under the AT condition");
  }
}

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

ModelParams params_of(const ExperimentConfig& cfg) { return ModelParams::make(cfg.beta, cfg.h); }

struct AmpRun {
  SymmetrizedDisorder gbar;
  AmpState state;
};

AmpRun run_amp_to(const ModelParams& p, const RsSolution& rs, Index n, Seed seed, int k) {
  DisorderMatrix g = sample_disorder(n, seed);
  AmpRun out{symmetrize(g), AmpState{}};
  out.state = amp_init(p, rs, std::move(g), std::max(k, 2));
  out.state = amp_advance(std::move(out.state), k);
  return out;
}

template <class F>
ExperimentRecord timed(const ExperimentConfig&, F&& body) {
  const auto t0 = Clock::now();
  ExperimentRecord rec = body();
  rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rec;
}

}  // namespace

int ExperimentRecord::failed_count() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const ReplicaRow& r) { return !r.ok; }));
}

std::vector<ColumnStats> ExperimentRecord::aggregate() const {
  std::vector<ColumnStats> out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.ok) v.push_back(r.values[c]);
    }
    out.push_back(column_stats(std::move(v)));
  }
  return out;
}

std::size_t ExperimentRecord::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  throw std::out_of_range("no column '" + name + "'");
}

double ExperimentRecord::scalar(const std::string& name) const {
  for (const auto& [k, v] : scalars) {
    if (k == name) return v;
  }
  throw std::out_of_range("no scalar '" + name + "'");
}

double order_independent_mean(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  return pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
}

ColumnStats column_stats(std::vector<double> values) {
  ColumnStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) {
    s.mean = kNaN;
    s.stddev = kNaN;
    return s;
  }
  std::sort(values.begin(), values.end());
  s.mean = pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - s.mean) * (values[i] - s.mean);
    std::sort(dev.begin(), dev.end());
    s.stddev = std::sqrt(pairwise_sum(dev.data(), dev.size()) / static_cast<double>(values.size() - 1));
  }
  return s;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string version_string() { return SKTAP_VERSION; }

const char* to_string(PhaseRegion r) {
  switch (r) {
    case PhaseRegion::beyond_AT: return "beyond_AT";
    case PhaseRegion::AT_and_P2: return "AT_and_P2";
    case PhaseRegion::AT_not_P2: return "AT_not_P2";
  }
  return "unknown";
}

PhaseRegion classify_region(double at, double p2) {
  if (at > 1.0) return PhaseRegion::beyond_AT;
  return p2 < 1.0 ? PhaseRegion::AT_and_P2 : PhaseRegion::AT_not_P2;
}

double at_boundary_h(double beta, double tol) {
  auto at = [&](double h) {
    const RsSolution s = solve_q(ModelParams::make(beta, h));
    return s.at_value;
  };
  double lo = kPhaseHMin, hi = kPhaseHMax;
  if (!(at(lo) > 1.0) || at(hi) > 1.0) return kNaN;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double plefka2_boundary_h(double beta, double tol) {
  auto p2 = [&](double h) { return solve_q(ModelParams::make(beta, h)).plefka2_value; };
  // geometric scan downward from the top of the range, then bisection
  const int steps = 96;
  const double ratio = std::pow(kPhaseHMax / 1e-3, 1.0 / steps);
  double hi = kPhaseHMax;
  if (p2(hi) >= 1.0) return kNaN;
  double lo = hi;
  bool found = false;
  for (int i = 1; i <= steps; ++i) {
    lo = kPhaseHMax / std::pow(ratio, i);
    if (p2(lo) >= 1.0) {
      found = true;
      break;
    }
    hi = lo;
  }
  if (!found) return kNaN;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (p2(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ExperimentRecord run_rs_solve(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    rec.columns = {"q", "rs_value", "at_value", "plefka2_value", "solver_residual", "gamma_1", "q_minus_gamma_sq_k"};
    ReplicaRow row;
    row.seed = cfg.seed;
    try {
      const RsSolution s = solve_q(p);
      const GammaSchedule sch = gamma_schedule(p, s.q, cfg.k);
      row.values = {s.q, s.rs_value, s.at_value, s.plefka2_value, s.residual, sch.gamma(1), s.q - sch.gamma_sq(cfg.k)};
      if (sch.frozen) rec.warnings.push_back("gamma schedule frozen from k = " + std::to_string(sch.frozen_from));
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rec.rows.push_back(std::move(row));
    return rec;
  });
}

ExperimentRecord run_amp(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    const RsSolution rs = solve_q(p);
    warn_beyond_at(rec, rs);
    const int k = cfg.k;
    rec.columns = {"norm_m_sq", "residual_norm", "phi_xi_overlap", "ks_field"};
    for (int s = 1; s <= k; ++s) rec.columns.push_back("overlap_" + std::to_string(s));
    const GammaSchedule sch = gamma_schedule(p, rs.q, k);
    rec.scalars = {{"q", rs.q}, {"rs_value", rs.rs_value}, {"at_value", rs.at_value}};
    for (int s = 1; s <= k; ++s) rec.scalars.emplace_back("gamma_" + std::to_string(s), sch.gamma(s));
    const double sd = p.beta * std::sqrt(rs.q);
    run_replicas(rec, [&](Seed seed) {
      AmpRun run = run_amp_to(p, rs, cfg.n, seed, k);
      const AmpDiagnostics d = diagnostics(run.state, rs);
      const Magnetization m = state_magnetization(run.state);
      const double res = tap_residual(run.gbar, m, p, rs.q).norm;
      const double ks = ks_distance(EsdCurve(run.state.h_k), [&](double x) { return normal_cdf((x - p.h) / sd); });
      std::vector<double> v{d.norm_m_sq, res, d.phi_xi_overlap, ks};
      v.insert(v.end(), d.gamma_overlaps.begin(), d.gamma_overlaps.end());
      return v;
    });
    return rec;
  });
}

ExperimentRecord run_tap_rs(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    const RsSolution rs = solve_q(p);
    warn_beyond_at(rec, rs);
    const int k = cfg.k;
    for (int j = 2; j <= k; ++j) rec.columns.push_back("per_site_k" + std::to_string(j));
    for (int j = 2; j <= k; ++j) rec.columns.push_back("residual_k" + std::to_string(j));
    rec.columns.push_back("deviation");
    rec.columns.push_back("norm_m_sq");
    rec.scalars = {{"q", rs.q}, {"rs_value", rs.rs_value}, {"at_value", rs.at_value}};
    run_replicas(rec, [&](Seed seed) {
      DisorderMatrix g = sample_disorder(cfg.n, seed);
      const SymmetrizedDisorder gbar = symmetrize(g);
      AmpState st = amp_init(p, rs, std::move(g), std::max(k, 2));
      std::vector<double> per_site, resid;
      while (st.k < k) {
        st = amp_step(std::move(st));
        const Magnetization m = state_magnetization(st);
        per_site.push_back(tap_free_energy(gbar, m, p).per_site);
        resid.push_back(tap_residual(gbar, m, p, rs.q).norm);
      }
      std::vector<double> v = per_site;
      v.insert(v.end(), resid.begin(), resid.end());
      v.push_back(per_site.back() - rs.rs_value);
      v.push_back(norm_sq(st.m_k));
      return v;
    });
    return rec;
  });
}

ExperimentRecord run_spectrum(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    const RsSolution rs = solve_q(p);
    warn_beyond_at(rec, rs);
    const NuMeasure nu = NuMeasure::from_rs(p, rs.q);
    const EdgeReport edge = support_edge(nu);
    const FreeConvolutionCdf limit(nu, nu.hessian_shift());
    const int k = cfg.k;
    rec.columns = {"ks_distance", "lambda1", "lambda1_below_half_edge", "b_rank", "residual_frobenius_per_n",
                   "norm_m_sq"};
    rec.scalars = {{"q", rs.q},
                   {"at_value", rs.at_value},
                   {"u_star", edge.u_star},
                   {"d", edge.d},
                   {"shifted_edge", edge.shifted_edge},
                   {"b_rank_bound", 2.0 * k - 1.0},
                   {"limit_mass", limit.total_mass()}};
    run_replicas(rec, [&](Seed seed) {
      AmpRun run = run_amp_to(p, rs, cfg.n, seed, k);
      const Magnetization m = state_magnetization(run.state);
      const HessianMatrix H = hessian(run.gbar, m, p);
      const EigenDecomposition eig = sym_eigen(H.entries);
      const double ks = ks_distance(EsdCurve(eig.eigenvalues), [&](double x) { return limit(x); });
      const double l1 = eig.eigenvalues[0];
      const DecompositionReport dec = hessian_decomposition(run.state, H, p, rs.q);
      return std::vector<double>{ks,
                                 l1,
                                 l1 < 0.5 * edge.shifted_edge ? 1.0 : 0.0,
                                 static_cast<double>(dec.b_rank),
                                 dec.residual_frobenius / static_cast<double>(cfg.n),
                                 norm_sq(run.state.m_k)};
    });
    return rec;
  });
}

ExperimentRecord run_edge(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    rec.columns = {"q",       "at_value",     "plefka2_value", "u_star", "d", "shifted_edge", "H_0",
                   "dH_0",    "regime_code",  "u_inf",         "independent_prediction"};
    ReplicaRow row;
    row.seed = cfg.seed;
    try {
      const RsSolution rs = solve_q(p);
      const NuMeasure nu = NuMeasure::from_rs(p, rs.q);
      const EdgeReport e = support_edge(nu);
      const HValue h0 = subordination_H(0.0, nu);
      const PopulationRoot ui = population_u_infinity(nu);
      row.values = {rs.q, rs.at_value, rs.plefka2_value, e.u_star, e.d, e.shifted_edge, h0.value, h0.derivative,
                    static_cast<double>(static_cast<int>(e.at_regime)), ui.found ? ui.u : -1.0,
                    independent_lambda1_prediction(nu)};
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rec.rows.push_back(std::move(row));
    return rec;
  });
}

ExperimentRecord run_theorem12(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    if (p.beta <= beta_zero()) {
      rec.warnings.push_back("beta <= beta_0: the predicted Rayleigh quotient is not positive");
    }
    const OptimalAlpha oa = optimal_alpha(p.beta);
    const double alpha = std::sqrt(oa.alpha_sq);
    rec.columns = {"rayleigh", "lambda1_H", "haar_statistic", "lambda1_goe", "lanczos_residual"};
    rec.scalars = {{"alpha_sq", oa.alpha_sq},
                   {"prediction", oa.prediction},
                   {"beta_zero", beta_zero()},
                   {"haar_limit", std::sqrt(2.0 / boost::math::constants::pi<double>())}};
    run_replicas(rec, [&](Seed seed) {
      const Index n = cfg.n;
      const double sn = std::sqrt(static_cast<double>(n));
      SymmetrizedDisorder gbar;
      {
        DisorderMatrix g = sample_disorder(n, seed);
        gbar = symmetrize(g);
      }
      const TopEigenpair top = top_eigpair(gbar.entries, 1e-8 * sn);
      if (!top.converged) throw ConvergenceError("top eigenvector of gbar", top.residual, top.matvecs);
      const Vector& v = top.v;
      const Magnetization m = sign_magnetization(v, alpha);
      const HessianMatrix H = hessian(gbar, m, p);
      const double rq = v.dot(H.entries * v);
      const TopEigenpair hl = top_eigpair(H.entries, 1e-8, &v);
      return std::vector<double>{rq, std::max(hl.lambda1, rq), haar_abs_statistic(v), p.beta * top.lambda1 / sn,
                                 hl.residual};
    });
    return rec;
  });
}

ExperimentRecord run_theorem15(const ExperimentConfig& cfg) {
  return timed(cfg, [&] {
    ExperimentRecord rec = make_record(cfg);
    const ModelParams p = params_of(cfg);
    const RsSolution rs = solve_q(p);
    if (rs.at_value >= 1.0) rec.warnings.push_back("parameter point is not strictly inside the AT region");
    const NuMeasure nu = NuMeasure::from_rs(p, rs.q);
    const EdgeReport edge = support_edge(nu);
    const PopulationRoot ui = population_u_infinity(nu);
    const double prediction = independent_lambda1_prediction(nu);
    const bool dense_check = cfg.n <= 1000;
    rec.columns = {"lambda1", "decoupled_sites", "u_n", "u_n_positive", "lambda1_le_0_05"};
    if (dense_check) rec.columns.push_back("sm_dense_abs_diff");
    rec.scalars = {{"q", rs.q},
                   {"at_value", rs.at_value},
                   {"plefka2_value", rs.plefka2_value},
                   {"shifted_edge", edge.shifted_edge},
                   {"u_inf", ui.found ? ui.u : -1.0},
                   {"prediction", prediction}};
    run_replicas(rec, [&](Seed seed) {
      const Index n = cfg.n;
      SymmetrizedDisorder gbar;
      {
        DisorderMatrix g = sample_disorder(n, seed);
        gbar = symmetrize(g);
      }
      const Magnetization m = sample_independent_magnetization(p, rs.q, n, seed);
      DecoupledTop top;
      {
        const HessianMatrix H = hessian(gbar, m, p);
        top = top_eigenvalue_decoupled(H.entries);
      }
      const ShermanMorrisonRoot sm = sherman_morrison_top_eig(m, p);
      std::vector<double> v{top.lambda1, static_cast<double>(top.excluded), sm.u_n, sm.exists_positive ? 1.0 : 0.0,
                            top.lambda1 <= 0.05 ? 1.0 : 0.0};
      if (dense_check) {
        Matrix A = (2.0 * p.beta * p.beta / static_cast<double>(n)) * m.values() * m.values().transpose();
        for (Index i = 0; i < n; ++i) A(i, i) -= m.inv_one_minus_sq(i);
        v.push_back(std::abs(sm.u_n - top_eigenvalue_decoupled(A).lambda1));
      }
      return v;
    });
    return rec;
  });
}

PhaseDiagram run_phase_diagram(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = Clock::now();
  PhaseDiagram pd;
  pd.config = cfg;
  pd.version = version_string();
  const GridSpec& g = cfg.grid;
  const int res = g.resolution;
  auto beta_at = [&](int i) { return g.beta_min + (g.beta_max - g.beta_min) * i / (res - 1); };
  auto h_at = [&](int j) { return g.h_min + (g.h_max - g.h_min) * j / (res - 1); };
  pd.points.resize(static_cast<std::size_t>(res) * res);
  pd.boundaries.resize(res);
  const int workers = resolve_workers(cfg);
  parallel_for(res, workers, [&](int i) {
    const double beta = beta_at(i);
    for (int j = 0; j < res; ++j) {
      PhasePoint pt;
      pt.beta = beta;
      pt.h = h_at(j);
      try {
        const RsSolution s = solve_q(ModelParams::make(pt.beta, pt.h));
        pt.q = s.q;
        pt.at_value = s.at_value;
        pt.plefka2_value = s.plefka2_value;
        pt.region = classify_region(s.at_value, s.plefka2_value);
      } catch (const std::exception&) {
        pt.ok = false;
        pt.q = pt.at_value = pt.plefka2_value = kNaN;
      }
      pd.points[static_cast<std::size_t>(i) * res + j] = pt;
    }
    PhaseBoundary b;
    b.beta = beta;
    try {
      b.h_at = at_boundary_h(beta);
    } catch (const std::exception&) {
      b.h_at = kNaN;
    }
    try {
      b.h_plefka2 = plefka2_boundary_h(beta);
    } catch (const std::exception&) {
      b.h_plefka2 = kNaN;
    }
    pd.boundaries[i] = b;
  });
  pd.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return pd;
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::rs_solve: return run_rs_solve(cfg);
    case ExperimentKind::amp_run: return run_amp(cfg);
    case ExperimentKind::tap_rs: return run_tap_rs(cfg);
    case ExperimentKind::spectrum: return run_spectrum(cfg);
    case ExperimentKind::edge: return run_edge(cfg);
    case ExperimentKind::theorem12: return run_theorem12(cfg);
    case ExperimentKind::theorem15: return run_theorem15(cfg);
    case ExperimentKind::phase_diagram: break;
  }
  throw ConfigError("run_experiment: phase_diagram has its own driver");
}

}  // namespace sktap
