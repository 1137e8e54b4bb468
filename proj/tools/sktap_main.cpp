#include "sktap/amp_iter.hpp"
#include "sktap/config.hpp"
#include "sktap/emit.hpp"
#include "sktap/experiments.hpp"
#include "sktap/rng.hpp"
#include "sktap/rs_core.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitReplicas = 3;

struct Flags {
  std::string config_path;
  std::optional<double> beta, h;
  std::optional<long long> n;
  std::optional<int> k, replicas, workers;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out, format, grid;
  bool no_timing = false;
  std::string state_out;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "flat JSON config file; flags override its values");
  sub->add_option("--beta", f.beta, "inverse temperature");
  sub->add_option("--h", f.h, "external field (nonzero)");
  sub->add_option("--n", f.n, "system size");
  sub->add_option("--k", f.k, "AMP iteration count");
  sub->add_option("--replicas", f.replicas, "number of independent replicas");
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--out", f.out, "output path, - for stdout");
  sub->add_option("--format", f.format, "csv or json");
  sub->add_option("--grid", f.grid, "phase grid BMIN:BMAX:HMIN:HMAX:RES");
  sub->add_option("--workers", f.workers, "worker threads (overrides SKTAP_WORKERS)");
  sub->add_flag("--no-timing", f.no_timing, "omit wall_seconds from JSON output");
}

sktap::GridSpec parse_grid(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 5) throw sktap::ConfigError("--grid expects BMIN:BMAX:HMIN:HMAX:RES");
  try {
    sktap::GridSpec g;
    std::size_t pos = 0;
    auto num = [&](const std::string& t) {
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    };
    g.beta_min = num(parts[0]);
    g.beta_max = num(parts[1]);
    g.h_min = num(parts[2]);
    g.h_max = num(parts[3]);
    const int r = std::stoi(parts[4], &pos);
    if (pos != parts[4].size()) throw std::invalid_argument(parts[4]);
    g.resolution = r;
    return g;
  } catch (const std::logic_error&) {
    throw sktap::ConfigError("--grid: cannot parse '" + s + "'");
  }
}

sktap::ExperimentConfig build_config(sktap::ExperimentKind kind, const Flags& f) {
  sktap::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = sktap::load_config_file(f.config_path, cfg);
  cfg.experiment = kind;
  if (f.beta) cfg.beta = *f.beta;
  if (f.h) cfg.h = *f.h;
  if (f.n) cfg.n = static_cast<sktap::Index>(*f.n);
  if (f.k) cfg.k = *f.k;
  if (f.replicas) cfg.replicas = *f.replicas;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output_path = *f.out;
  if (f.format) {
    const auto fmt = sktap::parse_format(*f.format);
    if (!fmt) throw sktap::ConfigError("unknown format '" + *f.format + "'");
    cfg.format = *fmt;
  }
  if (f.grid) cfg.grid = parse_grid(*f.grid);
  if (f.workers) cfg.workers = *f.workers;
  if (f.no_timing) cfg.timing = false;
  sktap::validate(cfg);
  return cfg;
}

void write_state_snapshot(const sktap::ExperimentConfig& cfg, const std::string& path) {
  const sktap::ModelParams p = sktap::ModelParams::make(cfg.beta, cfg.h);
  const sktap::RsSolution rs = sktap::solve_q(p);
  const sktap::Seed seed = sktap::replica_seed(cfg.seed, 0);
  sktap::AmpState st = sktap::amp_init(p, rs, sktap::sample_disorder(cfg.n, seed), std::max(cfg.k, 2));
  st = sktap::amp_advance(std::move(st), cfg.k);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open state file '" + path + "'");
  sktap::write_state_csv(st, f);
}

int run(sktap::ExperimentKind kind, const Flags& f) {
  const sktap::ExperimentConfig cfg = build_config(kind, f);
  if (kind == sktap::ExperimentKind::phase_diagram) {
    const sktap::PhaseDiagram pd = sktap::run_phase_diagram(cfg);
    sktap::emit(pd, cfg.output_path, cfg.format);
    return kExitOk;
  }
  const sktap::ExperimentRecord rec = sktap::run_experiment(cfg);
  for (const auto& w : rec.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : rec.rows) {
    if (!r.ok) std::cerr << "replica " << r.replica << " failed: " << r.error << '\n';
  }
  sktap::emit(rec, cfg.output_path, cfg.format);
  if (!f.state_out.empty()) write_state_snapshot(cfg, f.state_out);
  const int failed = rec.failed_count();
  if (!rec.rows.empty() && 2 * failed >= static_cast<int>(rec.rows.size())) return kExitReplicas;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on TAP free energies of the SK model"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", sktap::version_string());
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    sktap::ExperimentKind kind;
    const char* about;
  };
  const std::vector<Sub> subs = {
      {"rs-solve", sktap::ExperimentKind::rs_solve, "overlap q, RS value, AT and plefka2 values, gamma schedule"},
      {"amp-run", sktap::ExperimentKind::amp_run, "run the AMP iteration and report state-evolution diagnostics"},
      {"tap-rs", sktap::ExperimentKind::tap_rs, "per-site TAP free energy and residual along the iteration"},
      {"spectrum", sktap::ExperimentKind::spectrum, "TAP Hessian spectrum against the free-convolution limit"},
      {"edge", sktap::ExperimentKind::edge, "limiting spectral edge and outlier prediction"},
      {"theorem12", sktap::ExperimentKind::theorem12, "Rayleigh quotient of the Hessian at sign magnetizations"},
      {"theorem15", sktap::ExperimentKind::theorem15, "top Hessian eigenvalue at independent magnetizations"},
      {"phase-diagram", sktap::ExperimentKind::phase_diagram, "classify a (beta, h) grid by AT and plefka2"},
  };
  Flags flags;
  std::vector<std::pair<CLI::App*, sktap::ExperimentKind>> handles;
  for (const auto& [name, kind, about] : subs) {
    CLI::App* sub = app.add_subcommand(name, about);
    add_common(sub, flags);
    if (kind == sktap::ExperimentKind::amp_run) {
      sub->add_option("--state-out", flags.state_out, "write the replica-0 AMP state (i,h,m,phi_k) to this CSV");
    }
    handles.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (const auto& [sub, kind] : handles) {
      if (sub->parsed()) return run(kind, flags);
    }
  } catch (const sktap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sktap::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
