#include "sktap/emit.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace sktap {

namespace {

using ojson = nlohmann::ordered_json;

// nlohmann prints the shortest round-trip form; the output contract is 17 digits.
void dump(const ojson& v, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case ojson::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << ojson(it.key()).dump() << ": ";
        dump(it.value(), os, indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case ojson::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        dump(v[i], os, indent + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double x = v.get<double>();
      if (std::isfinite(x)) {
        os << format_number(x);
      } else {
        os << "null";
      }
      return;
    }
    default:
      os << v.dump();
  }
}

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson header(const char* schema, const ExperimentConfig& cfg, const std::string& version, double wall) {
  ojson j;
  j["schema"] = schema;
  j["version"] = version;
  j["config"] = ojson::parse(config_to_json(cfg));
  if (cfg.timing) j["wall_seconds"] = wall;
  return j;
}

std::string csv_cell(double x) { return std::isfinite(x) ? format_number(x) : std::string(); }

template <class Writer>
void to_path(const std::string& path, Writer&& w) {
  if (path == "-") {
    w(std::cout);
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  w(f);
  f.close();
  if (!f) throw std::runtime_error("failed writing output file '" + path + "'");
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const ExperimentRecord& rec, std::ostream& os) {
  os << "replica,seed,status";
  for (const auto& c : rec.columns) os << ',' << c;
  os << '\n';
  for (const auto& r : rec.rows) {
    os << r.replica << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
    for (std::size_t c = 0; c < rec.columns.size(); ++c) {
      os << ',';
      if (r.ok) os << format_number(r.values[c]);
    }
    os << '\n';
  }
  if (rec.rows.empty()) return;
  os << "aggregate,,mean";
  for (const auto& s : rec.aggregate()) os << ',' << csv_cell(s.mean);
  os << '\n';
}

void write_json(const ExperimentRecord& rec, std::ostream& os) {
  ojson j = header(kExperimentSchema, rec.config, rec.version, rec.wall_seconds);
  j["columns"] = rec.columns;
  ojson reps = ojson::array();
  for (const auto& r : rec.rows) {
    ojson o;
    o["replica"] = r.replica;
    o["seed"] = r.seed;
    o["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      ojson vals = ojson::array();
      for (double v : r.values) vals.push_back(number_or_null(v));
      o["values"] = vals;
    } else {
      o["error"] = r.error;
    }
    reps.push_back(o);
  }
  j["replicas"] = reps;
  ojson agg = ojson::object();
  const auto stats = rec.aggregate();
  for (std::size_t c = 0; c < rec.columns.size(); ++c) {
    agg[rec.columns[c]] = {{"mean", number_or_null(stats[c].mean)},
                           {"stddev", number_or_null(stats[c].stddev)},
                           {"count", stats[c].count}};
  }
  j["aggregate"] = agg;
  ojson sc = ojson::object();
  for (const auto& [k, v] : rec.scalars) sc[k] = number_or_null(v);
  j["scalars"] = sc;
  j["failed_replicas"] = rec.failed_count();
  j["warnings"] = rec.warnings;
  dump(j, os, 0);
  os << '\n';
}

void write_csv(const PhaseDiagram& pd, std::ostream& os) {
  os << "beta,h,region_code\n";
  for (const auto& p : pd.points) {
    os << format_number(p.beta) << ',' << format_number(p.h) << ',';
    if (p.ok) os << static_cast<int>(p.region);
    os << '\n';
  }
}

void write_boundaries_csv(const PhaseDiagram& pd, std::ostream& os) {
  os << "beta,h_at,h_plefka2\n";
  for (const auto& b : pd.boundaries) {
    os << format_number(b.beta) << ',' << csv_cell(b.h_at) << ',' << csv_cell(b.h_plefka2) << '\n';
  }
}

void write_json(const PhaseDiagram& pd, std::ostream& os) {
  ojson j = header(kPhaseDiagramSchema, pd.config, pd.version, pd.wall_seconds);
  j["region_codes"] = {{"0", to_string(PhaseRegion::beyond_AT)},
                       {"1", to_string(PhaseRegion::AT_and_P2)},
                       {"2", to_string(PhaseRegion::AT_not_P2)}};
  ojson pts = ojson::array();
  for (const auto& p : pd.points) {
    ojson o;
    o["beta"] = p.beta;
    o["h"] = p.h;
    if (p.ok) {
      o["region_code"] = static_cast<int>(p.region);
      o["q"] = p.q;
      o["at_value"] = p.at_value;
      o["plefka2_value"] = p.plefka2_value;
    } else {
      o["region_code"] = nullptr;
    }
    pts.push_back(o);
  }
  j["points"] = pts;
  ojson bs = ojson::array();
  for (const auto& b : pd.boundaries) {
    bs.push_back({{"beta", b.beta}, {"h_at", number_or_null(b.h_at)}, {"h_plefka2", number_or_null(b.h_plefka2)}});
  }
  j["boundaries"] = bs;
  dump(j, os, 0);
  os << '\n';
}

void emit(const ExperimentRecord& rec, const std::string& path, OutputFormat format) {
  to_path(path, [&](std::ostream& os) {
    if (format == OutputFormat::csv) {
      write_csv(rec, os);
    } else {
      write_json(rec, os);
    }
  });
}

void emit(const PhaseDiagram& pd, const std::string& path, OutputFormat format) {
  if (format == OutputFormat::json) {
    to_path(path, [&](std::ostream& os) { write_json(pd, os); });
    return;
  }
  to_path(path, [&](std::ostream& os) { write_csv(pd, os); });
  if (path != "-") to_path(path + ".boundaries.csv", [&](std::ostream& os) { write_boundaries_csv(pd, os); });
}

}  // namespace sktap
