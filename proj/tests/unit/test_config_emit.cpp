#include "sktap/config.hpp"
#include "sktap/emit.hpp"
#include "sktap/experiments.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace sktap;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

ExperimentRecord awkward_record() {
  ExperimentRecord rec;
  rec.config.experiment = ExperimentKind::amp_run;
  rec.version = "test";
  rec.columns = {"a", "b"};
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int r = 0; r < 5; ++r) {
    ReplicaRow row;
    row.replica = r;
    row.seed = 1000 + r;
    row.values = {u(gen) * std::pow(10.0, 3 * r - 6), 1.0 / 3.0 + r};
    rec.rows.push_back(row);
  }
  rec.rows[2].ok = false;
  rec.rows[2].error = "degenerate \"basis\"";
  rec.rows[2].values.clear();
  rec.scalars = {{"pi", M_PI}, {"tiny", 5e-324}};
  rec.warnings = {"careful"};
  return rec;
}

}  // namespace

TEST(Config, ExperimentNames) {
  EXPECT_EQ(parse_experiment("rs-solve"), ExperimentKind::rs_solve);
  EXPECT_EQ(parse_experiment("phase_diagram"), ExperimentKind::phase_diagram);
  EXPECT_EQ(parse_experiment("theorem12"), ExperimentKind::theorem12);
  EXPECT_FALSE(parse_experiment("bogus").has_value());
  for (auto k : {ExperimentKind::rs_solve, ExperimentKind::amp_run, ExperimentKind::tap_rs, ExperimentKind::spectrum,
                 ExperimentKind::edge, ExperimentKind::theorem12, ExperimentKind::theorem15,
                 ExperimentKind::phase_diagram}) {
    EXPECT_EQ(parse_experiment(to_string(k)), k);
  }
}

TEST(Config, OverlayAndUnknownKeys) {
  const ExperimentConfig c = apply_config_json(R"({"beta": 2.5, "n": 64, "format": "json", "seed": 99})", {});
  EXPECT_EQ(c.beta, 2.5);
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.format, OutputFormat::json);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.h, ExperimentConfig{}.h);
  EXPECT_THROW(apply_config_json(R"({"betta": 2})", {}), ConfigError);
  EXPECT_THROW(apply_config_json(R"({"n": 2.5})", {}), ConfigError);
  EXPECT_THROW(apply_config_json(R"({"beta": "x"})", {}), ConfigError);
  EXPECT_THROW(apply_config_json(R"({"seed": -1})", {}), ConfigError);
  EXPECT_THROW(apply_config_json(R"([1,2])", {}), ConfigError);
  EXPECT_THROW(apply_config_json("{", {}), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/cfg.json", {}), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::theorem15;
  c.beta = 0.1 + 0.2;
  c.grid.resolution = 17;
  c.timing = false;
  const ExperimentConfig back = apply_config_json(config_to_json(c), {});
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.beta, c.beta);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  c.replicas = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.n = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.h = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.experiment = ExperimentKind::amp_run;
  c.k = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.experiment = ExperimentKind::phase_diagram;
  c.grid.resolution = 9;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, WorkersFromEnvironment) {
  ExperimentConfig c;
  ::unsetenv(kWorkersEnv);
  EXPECT_EQ(resolve_workers(c), 1);
  ::setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(resolve_workers(c), 3);
  c.workers = 2;
  EXPECT_EQ(resolve_workers(c), 2);
  c.workers = 0;
  ::setenv(kWorkersEnv, "zero", 1);
  EXPECT_THROW(resolve_workers(c), ConfigError);
  ::unsetenv(kWorkersEnv);
}

TEST(Emit, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-(0.1 + 0.2)), "-0.30000000000000004");
  EXPECT_EQ(format_number(1e-300 / 3.0), "3.3333333333333334e-301");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Emit, CsvRoundTripIsBitExact) {
  const ExperimentRecord rec = awkward_record();
  std::ostringstream os;
  write_csv(rec, os);
  const auto rows = read_csv(os.str());
  ASSERT_EQ(rows.size(), 1 + rec.rows.size() + 1);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"replica", "seed", "status", "a", "b"}));
  for (std::size_t r = 0; r < rec.rows.size(); ++r) {
    const auto& cells = rows[r + 1];
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[2], rec.rows[r].ok ? "ok" : "failed");
    if (!rec.rows[r].ok) {
      EXPECT_EQ(cells[3], "");
      continue;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      const double back = std::strtod(cells[3 + c].c_str(), nullptr);
      EXPECT_EQ(std::memcmp(&back, &rec.rows[r].values[c], sizeof back), 0);
    }
  }
  EXPECT_EQ(rows.back()[0], "aggregate");
  EXPECT_EQ(rows.back()[2], "mean");
}

TEST(Emit, JsonRoundTripIsBitExact) {
  ExperimentRecord rec = awkward_record();
  rec.config.timing = false;
  std::ostringstream os;
  write_json(rec, os);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["schema"], kExperimentSchema);
  EXPECT_FALSE(j.contains("wall_seconds"));
  EXPECT_EQ(j["replicas"][2]["status"], "failed");
  EXPECT_EQ(j["replicas"][2]["error"], "degenerate \"basis\"");
  for (std::size_t r = 0; r < rec.rows.size(); ++r) {
    if (!rec.rows[r].ok) continue;
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(j["replicas"][r]["values"][c].get<double>(), rec.rows[r].values[c]);
  }
  EXPECT_EQ(j["scalars"]["pi"].get<double>(), M_PI);
  EXPECT_EQ(j["scalars"]["tiny"].get<double>(), 5e-324);
  EXPECT_EQ(j["aggregate"]["a"]["count"], 4);
  EXPECT_EQ(j["failed_replicas"], 1);
  EXPECT_EQ(j["config"]["experiment"], "amp_run");
}

TEST(Emit, JsonFieldOrderFixedAndTimingEchoed) {
  ExperimentRecord rec = awkward_record();
  rec.wall_seconds = 1.25;
  std::ostringstream os;
  write_json(rec, os);
  const auto j = nlohmann::ordered_json::parse(os.str());
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"schema", "version", "config", "wall_seconds", "columns", "replicas",
                                            "aggregate", "scalars", "failed_replicas", "warnings"}));
  EXPECT_EQ(j["wall_seconds"].get<double>(), 1.25);
}

TEST(Emit, EmptyRecordIsHeaderOnly) {
  ExperimentRecord rec;
  rec.columns = {"x", "y"};
  std::ostringstream os;
  write_csv(rec, os);
  EXPECT_EQ(os.str(), "replica,seed,status,x,y\n");
}

TEST(Emit, PhaseDiagramCsvIsThreeColumnGrid) {
  PhaseDiagram pd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      PhasePoint p;
      p.beta = 0.5 * (i + 1);
      p.h = 0.25 * (j + 1);
      p.region = static_cast<PhaseRegion>((i + j) % 3);
      pd.points.push_back(p);
    }
  pd.points[5].ok = false;
  pd.boundaries = {{0.5, NAN, NAN}, {1.0, 0.1, NAN}, {1.5, 0.4, 0.3}};
  std::ostringstream os, bs;
  write_csv(pd, os);
  write_boundaries_csv(pd, bs);
  const auto rows = read_csv(os.str());
  ASSERT_EQ(rows.size(), 13u);
  for (const auto& r : rows) EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(rows[6][2], "");
  EXPECT_EQ(bs.str(), "beta,h_at,h_plefka2\n0.5,,\n1,0.10000000000000001,\n1.5,0.40000000000000002,0.29999999999999999\n");
}

TEST(Emit, WritesFilesAndReportsPath) {
  const auto dir = std::filesystem::temp_directory_path() / "sktap_emit_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "rec.csv").string();
  emit(awkward_record(), path, OutputFormat::csv);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "replica,seed,status,a,b");
  try {
    emit(awkward_record(), "/nonexistent/dir/out.csv", OutputFormat::json);
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.csv"), std::string::npos);
  }
  PhaseDiagram pd;
  pd.points.push_back({});
  pd.boundaries.push_back({1.0, 0.5, NAN});
  const std::string pdp = (dir / "pd.csv").string();
  emit(pd, pdp, OutputFormat::csv);
  EXPECT_TRUE(std::filesystem::exists(pdp + ".boundaries.csv"));
  std::filesystem::remove_all(dir);
}
