#pragma once

#include "locball/experiments/artifacts.hpp"
#include "locball/experiments/tolerances.hpp"
#include "locball/localization.hpp"

#include <map>
#include <string>
#include <vector>

namespace locball::experiments {

/// Seed for a named sub-experiment of a master seed.
Seed named_seed(Seed master, const std::string& name);

struct CriterionResult {
  int id = 0;
  std::string title;
  ExperimentOutput output;
  double seconds = 0.0;

  bool passed() const { return output.passed(); }
  /// "[PASS] C07 <title>: <verdict details>"
  std::string line() const;
};

/// The eleven acceptance criteria with their pinned parameters. Criteria 2
/// and 3 share one set of path ensembles, cached per suite.
class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(Seed master_seed, Tolerances tolerances = {});

  static const std::vector<std::pair<int, std::string>>& catalog();

  CriterionResult run(int id);

 private:
  ExperimentOutput gaussian_closed_form();
  ExperimentOutput martingale();
  ExperimentOutput covariance_bound();
  ExperimentOutput trace_behaviour();
  ExperimentOutput shrinkage();
  ExperimentOutput oracle_agreement();
  ExperimentOutput exponent_shape();
  ExperimentOutput borell_subgaussian();
  ExperimentOutput bound_evaluators();
  ExperimentOutput slicing();
  ExperimentOutput certificate();

  const std::vector<LocalizationPath>& martingale_paths(const std::string& family);

  Seed seed_;
  Tolerances tol_;
  std::map<std::string, std::vector<LocalizationPath>> path_cache_;
};

}  // namespace locball::experiments
