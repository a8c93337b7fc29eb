#include "locball/experiments/artifacts.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace locball::experiments {

bool ExperimentOutput::passed() const {
  for (const auto& v : verdicts) {
    if (!v.passed) return false;
  }
  return true;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << csv_header << "\r\n";
  for (const auto& r : rows) {
    out << csv_field(r.family) << ',' << r.n << ',' << format_number(r.epsilon) << ',' << csv_field(r.quantity)
        << ',' << csv_field(r.unit) << ',' << format_number(r.estimate) << ',' << format_number(r.ci_low) << ','
        << format_number(r.ci_high) << "\r\n";
  }
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char byte : digest) {
    out += hex[byte >> 4];
    out += hex[byte & 15];
  }
  return out;
}

nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentOutput& output,
                            double wall_seconds, const std::string& csv_name) {
  nlohmann::json j;
  const nlohmann::json echo = config.to_json();
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  j["config"] = echo;
  j["input_hash"] = git_blob_hash(echo.dump());
  j["wall_clock_seconds"] = wall_seconds;
  j["csv"] = csv_name;
  nlohmann::json tol = nlohmann::json::object();
  for (const auto& [name, entry] : config.tolerances.table()) {
    tol[name] = {{"value", entry.value}, {"description", entry.description}};
  }
  j["tolerances"] = tol;
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : output.verdicts) {
    j["verdicts"].push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  }
  j["passed"] = output.passed();
  j["details"] = output.details;
  return j;
}

ArtifactPaths write_artifacts(const ExperimentConfig& config, const ExperimentOutput& output,
                              double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cli", "cannot create output directory " + dir.string() + ": " + ec.message());
  ArtifactPaths paths{dir / (config.artifact_stem() + ".csv"), dir / (config.artifact_stem() + ".json")};
  {
    std::ofstream out(paths.csv, std::ios::binary);
    if (!out) throw Error("cli", "cannot write " + paths.csv.string());
    write_csv(out, output.rows);
  }
  {
    std::ofstream out(paths.json, std::ios::binary);
    if (!out) throw Error("cli", "cannot write " + paths.json.string());
    out << summary_json(config, output, wall_seconds, paths.csv.filename().string()).dump(2) << '\n';
  }
  return paths;
}

}  // namespace locball::experiments
