#pragma once

#include "locball/experiments/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace locball::experiments {

/// One CSV line: family,n,epsilon,quantity,unit,estimate,ci_low,ci_high.
/// NaN fields are written empty.
struct ResultRow {
  std::string family;
  int n = 0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  std::string quantity;
  std::string unit;
  double estimate = 0.0;
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<Verdict> verdicts;
  nlohmann::json details = nlohmann::json::object();

  bool passed() const;
};

inline const char* csv_header = "family,n,epsilon,quantity,unit,estimate,ci_low,ci_high";

/// RFC 4180 field quoting.
std::string csv_field(const std::string& value);
/// Shortest round-trip decimal form; empty for NaN.
std::string format_number(double value);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

/// Git blob hash (SHA-1 of "blob <len>\0<content>") as lowercase hex.
std::string git_blob_hash(const std::string& content);

nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentOutput& output,
                            double wall_seconds, const std::string& csv_name);

struct ArtifactPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes `<outdir>/<stem>.csv` and `<outdir>/<stem>.json`.
ArtifactPaths write_artifacts(const ExperimentConfig& config, const ExperimentOutput& output,
                              double wall_seconds);

}  // namespace locball::experiments
