#include "sktap/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sktap {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::rs_solve, "rs_solve"},   {ExperimentKind::amp_run, "amp_run"},
    {ExperimentKind::tap_rs, "tap_rs"},       {ExperimentKind::spectrum, "spectrum"},
    {ExperimentKind::edge, "edge"},           {ExperimentKind::theorem12, "theorem12"},
    {ExperimentKind::theorem15, "theorem15"}, {ExperimentKind::phase_diagram, "phase_diagram"},
};

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

long long get_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<long long>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  std::string s(name);
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  for (const auto& [k, n] : kKinds) {
    if (s == n) return k;
  }
  return std::nullopt;
}

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  return std::nullopt;
}

ExperimentConfig apply_config_json(std::string_view text, ExperimentConfig cfg) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "experiment") {
      const auto k = parse_experiment(get_string(v, key));
      if (!k) throw ConfigError("unknown experiment '" + v.get<std::string>() + "'");
      cfg.experiment = *k;
    } else if (key == "beta") {
      cfg.beta = get_number(v, key);
    } else if (key == "h") {
      cfg.h = get_number(v, key);
    } else if (key == "n") {
      cfg.n = static_cast<Index>(get_integer(v, key));
    } else if (key == "k") {
      cfg.k = static_cast<int>(get_integer(v, key));
    } else if (key == "replicas") {
      cfg.replicas = static_cast<int>(get_integer(v, key));
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("config key 'seed' must be a nonnegative integer");
      }
      cfg.seed = v.get<Seed>();
    } else if (key == "output") {
      cfg.output_path = get_string(v, key);
    } else if (key == "format") {
      const auto f = parse_format(get_string(v, key));
      if (!f) throw ConfigError("format must be 'csv' or 'json'");
      cfg.format = *f;
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(get_integer(v, key));
    } else if (key == "timing") {
      if (!v.is_boolean()) throw ConfigError("config key 'timing' must be a boolean");
      cfg.timing = v.get<bool>();
    } else if (key == "grid_beta_min") {
      cfg.grid.beta_min = get_number(v, key);
    } else if (key == "grid_beta_max") {
      cfg.grid.beta_max = get_number(v, key);
    } else if (key == "grid_h_min") {
      cfg.grid.h_min = get_number(v, key);
    } else if (key == "grid_h_max") {
      cfg.grid.h_max = get_number(v, key);
    } else if (key == "grid_resolution") {
      cfg.grid.resolution = static_cast<int>(get_integer(v, key));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_config_json(ss.str(), std::move(base));
}

void validate(const ExperimentConfig& c) {
  if (!std::isfinite(c.beta) || c.beta < kMinBeta) throw ConfigError("beta must be >= 1e-8");
  if (!std::isfinite(c.h) || c.h == 0.0) throw ConfigError("h must be finite and nonzero");
  if (c.n < 2) throw ConfigError("n must be >= 2");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (c.workers < 0) throw ConfigError("workers must be >= 0");
  if (c.output_path.empty()) throw ConfigError("output path must be nonempty");
  const bool amp = c.experiment == ExperimentKind::amp_run || c.experiment == ExperimentKind::tap_rs ||
                   c.experiment == ExperimentKind::spectrum;
  if (amp && c.k < 2) throw ConfigError("AMP experiments need k >= 2");
  if (c.experiment == ExperimentKind::phase_diagram) {
    const GridSpec& g = c.grid;
    if (g.resolution < 10) throw ConfigError("grid resolution must be >= 10");
    if (!(g.beta_min >= kMinBeta && g.beta_max > g.beta_min)) throw ConfigError("invalid grid beta range");
    if (!(g.h_min > 0.0 && g.h_max > g.h_min)) throw ConfigError("invalid grid h range (needs 0 < h_min < h_max)");
  }
}

int resolve_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return 1;
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  j["experiment"] = to_string(c.experiment);
  j["beta"] = c.beta;
  j["h"] = c.h;
  j["n"] = static_cast<long long>(c.n);
  j["k"] = c.k;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["output"] = c.output_path;
  j["format"] = to_string(c.format);
  j["workers"] = c.workers;
  j["timing"] = c.timing;
  j["grid_beta_min"] = c.grid.beta_min;
  j["grid_beta_max"] = c.grid.beta_max;
  j["grid_h_min"] = c.grid.h_min;
  j["grid_h_max"] = c.grid.h_max;
  j["grid_resolution"] = c.grid.resolution;
  return j.dump();
}

}  // namespace sktap
