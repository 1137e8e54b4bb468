#pragma once

#include "sktap/config.hpp"
#include "sktap/experiments.hpp"

#include <iosfwd>
#include <string>

namespace sktap {

inline constexpr const char* kExperimentSchema = "sktap.experiment/1";
inline constexpr const char* kPhaseDiagramSchema = "sktap.phase_diagram/1";

// "%.17g"; NaN and infinities print as nan, inf, -inf.
std::string format_number(double x);

// CSV: header replica,seed,status,<columns>, one row per replica, then one
// aggregate row (replica = aggregate, status = mean) unless there are no rows.
void write_csv(const ExperimentRecord& rec, std::ostream& os);
void write_json(const ExperimentRecord& rec, std::ostream& os);

// CSV: beta,h,region_code (beta-major; region_code empty for failed points).
void write_csv(const PhaseDiagram& pd, std::ostream& os);
// CSV: beta,h_at,h_plefka2 (empty where a curve does not cross).
void write_boundaries_csv(const PhaseDiagram& pd, std::ostream& os);
void write_json(const PhaseDiagram& pd, std::ostream& os);

// path "-" is stdout. Throws std::runtime_error naming the path on I/O failure.
void emit(const ExperimentRecord& rec, const std::string& path, OutputFormat format);
// CSV output also writes <path>.boundaries.csv (skipped for stdout).
void emit(const PhaseDiagram& pd, const std::string& path, OutputFormat format);

}  // namespace sktap
