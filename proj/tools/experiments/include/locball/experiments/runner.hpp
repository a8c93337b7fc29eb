#pragma once

#include "locball/experiments/artifacts.hpp"
#include "locball/experiments/config.hpp"
#include "locball/localization.hpp"
#include "locball/measures.hpp"
#include "locball/reduction.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <vector>

namespace locball::experiments {

/// The configured family after its transform (none, symmetrize or reduce).
Family build_family(const ExperimentConfig& config);

/// "auto" resolves to the most exact backend the family supports.
Backend resolve_backend(const ExperimentConfig& config, const Family& family);

/// Everything an experiment produced. `paths` is filled by `localize` and
/// `reduction` by `reduce`.
struct RunResult {
  ExperimentOutput output;
  std::vector<LocalizationPath> paths;
  std::optional<ReductionReport> reduction;
};

/// Dispatches on config.experiment after validating the config.
RunResult run(const ExperimentConfig& config);

inline ExperimentOutput run_experiment(const ExperimentConfig& config) { return run(config).output; }

/// Flat object with the four report fields.
nlohmann::json reduction_report_json(const ReductionReport& report);

/// Columns path_id,t,theta_norm,a_norm,trace_A,lambda_max_A,ess; one line per
/// recorded state.
void write_path_csv(std::ostream& out, const std::vector<LocalizationPath>& paths);

}  // namespace locball::experiments
