#pragma once

#include "sktap/config.hpp"
#include "sktap/types.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sktap {

struct ReplicaRow {
  int replica = 0;
  Seed seed = 0;
  bool ok = true;
  std::string error;
  std::vector<double> values;  // aligned with ExperimentRecord::columns; empty when !ok
};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  int count = 0;
};

struct ExperimentRecord {
  ExperimentConfig config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<std::string> columns;
  std::vector<ReplicaRow> rows;
  // Replica-independent numbers: predictions, RS values, reference constants.
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::string> warnings;

  int failed_count() const;
  // Statistics over successful replicas, one entry per column.
  std::vector<ColumnStats> aggregate() const;
  // Index of a column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
  double scalar(const std::string& name) const;
};

// Mean by pairwise summation of the sorted values; independent of input order.
double order_independent_mean(std::vector<double> values);
ColumnStats column_stats(std::vector<double> values);

// Runs fn(0..count-1) on a pool of `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

std::string version_string();

enum class PhaseRegion { beyond_AT = 0, AT_and_P2 = 1, AT_not_P2 = 2 };
const char* to_string(PhaseRegion r);
PhaseRegion classify_region(double at_value, double plefka2_value);

struct PhasePoint {
  double beta = 0.0;
  double h = 0.0;
  double q = 0.0;
  double at_value = 0.0;
  double plefka2_value = 0.0;
  PhaseRegion region = PhaseRegion::AT_and_P2;
  bool ok = true;
};

// Boundary curves at fixed beta; NaN when the curve does not cross that column.
struct PhaseBoundary {
  double beta = 0.0;
  double h_at = 0.0;        // at_value(beta, h) = 1
  double h_plefka2 = 0.0;   // largest h with plefka2_value(beta, h) = 1
};

struct PhaseDiagram {
  ExperimentConfig config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<PhasePoint> points;  // beta-major order
  std::vector<PhaseBoundary> boundaries;
};

// Bisection in h on (1e-9, 60] to 1e-6 for at_value = 1; NaN if at_value <= 1 throughout.
double at_boundary_h(double beta, double tol = 1e-6);
// Largest crossing of plefka2_value = 1 in h on (1e-9, 60], NaN if none.
double plefka2_boundary_h(double beta, double tol = 1e-6);

ExperimentRecord run_rs_solve(const ExperimentConfig& cfg);
ExperimentRecord run_amp(const ExperimentConfig& cfg);
ExperimentRecord run_tap_rs(const ExperimentConfig& cfg);
ExperimentRecord run_spectrum(const ExperimentConfig& cfg);
ExperimentRecord run_edge(const ExperimentConfig& cfg);
ExperimentRecord run_theorem12(const ExperimentConfig& cfg);
ExperimentRecord run_theorem15(const ExperimentConfig& cfg);
PhaseDiagram run_phase_diagram(const ExperimentConfig& cfg);

// Dispatch for every kind except phase_diagram.
ExperimentRecord run_experiment(const ExperimentConfig& cfg);

}  // namespace sktap
