#pragma once

#include "locball/experiments/tolerances.hpp"
#include "locball/types.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace locball::experiments {

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  Seed seed = 1;
  std::string output_dir = ".";

  // family
  std::string family = "gaussian";
  int dimension = 2;
  std::string transform = "none";  // none | symmetrize | reduce
  double c0_constant = 3.0;

  // numeric parameters
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t paths = 256;
  std::string backend = "auto";
  std::size_t budget = 20'000;
  std::size_t region_budget = 100'000;
  std::size_t samples = 1'000'000;
  std::size_t record_every = 10;
  std::vector<double> epsilons{0.05, 0.1, 0.2};
  std::vector<double> slice_epsilons{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0};
  double lambda = 2.0;
  double c1 = 0.5;
  double radius = 0.0;  // 0: sqrt(n)
  std::vector<double> exponents{3.0, 4.0, 6.0};
  std::size_t directions = 8;
  std::vector<double> times{0.25, 0.5, 1.0};
  std::vector<double> t_values{0.5, 1.0};
  int p_max = 6;
  std::string body = "cube";
  double c_reference = 2.718281828459045;
  double c_universal = 1.0;
  double b = 1.0;
  double psi_sq = 0.0;  // 0: C log n with C = 1
  std::vector<double> spectrum;  // empty: identity of the configured dimension
  std::vector<int> criteria;     // replicate-all subset; empty: all

  Tolerances tolerances;

  /// Every problem with the configuration; empty when valid.
  std::vector<std::string> problems() const;
  /// Throws Error listing every problem.
  void validate() const;

  nlohmann::json to_json() const;
  /// Canonical echo: nested sections, tolerances included.
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Sectioned key=value text ([experiment], [family], [parameters],
  /// [tolerances]).
  static ExperimentConfig from_ini(const std::string& text);
  /// Dispatches on the extension (.json, otherwise INI).
  static ExperimentConfig load(const std::filesystem::path& file);

  /// `<experiment>-<seed>` with dots replaced by dashes.
  std::string artifact_stem() const;
};

}  // namespace locball::experiments
