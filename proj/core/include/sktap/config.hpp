#pragma once

#include "sktap/types.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sktap {

// Invalid or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { rs_solve, amp_run, tap_rs, spectrum, edge, theorem12, theorem15, phase_diagram };

// "rs_solve" style name.
std::string to_string(ExperimentKind kind);
// Accepts "rs_solve" and "rs-solve".
std::optional<ExperimentKind> parse_experiment(std::string_view name);

enum class OutputFormat { csv, json };
std::string to_string(OutputFormat f);
std::optional<OutputFormat> parse_format(std::string_view name);

struct GridSpec {
  double beta_min = 0.02;
  double beta_max = 6.0;
  double h_min = 0.02;
  double h_max = 10.0;
  int resolution = 300;  // points per axis
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::rs_solve;
  double beta = 1.0;
  double h = 0.5;
  Index n = 1000;
  int k = 8;
  int replicas = 1;
  Seed seed = 1;
  std::string output_path = "-";
  OutputFormat format = OutputFormat::csv;
  GridSpec grid;
  int workers = 0;     // 0: SKTAP_WORKERS or 1
  bool timing = true;  // wall-clock field in JSON output
};

inline constexpr const char* kWorkersEnv = "SKTAP_WORKERS";

// Overlays a flat JSON object onto base. Unknown keys and wrong types throw ConfigError.
ExperimentConfig apply_config_json(std::string_view json_text, ExperimentConfig base);
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base);

// Throws ConfigError on invalid settings.
void validate(const ExperimentConfig& cfg);

// Worker count after applying SKTAP_WORKERS; at least 1.
int resolve_workers(const ExperimentConfig& cfg);

// Flat JSON object with every key accepted by apply_config_json.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace sktap
