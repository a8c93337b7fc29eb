#include "locball/experiments/tolerances.hpp"

#include "locball/types.hpp"

namespace locball::experiments {

Tolerances::Tolerances()
    : table_{
          {"gaussian_exact_abs", {1e-6, "closed-form Gaussian moments and traces (absolute)"}},
          {"martingale_z", {4.0, "ensemble vs t = 0 value, in combined standard errors"}},
          {"covariance_slack_exact", {0.02, "lambda_max(A_t) - 1/t, closed-form and quadrature backends"}},
          {"covariance_slack_sampling", {0.1, "lambda_max(A_t) - 1/t, sampling backend"}},
          {"trace_fraction_min", {0.25, "lower gate on E Tr(A_t*) / n"}},
          {"shrinkage_z", {4.0, "integrated shrinkage bound slack, in standard errors"}},
          {"binomial_z", {3.0, "event frequency slack, in binomial standard errors"}},
          {"oracle_cover_min", {10.0, "Gaussian small-ball cells whose interval must cover the exact value"}},
          {"fit_c_min", {0.2, "minimum fitted small-ball exponent"}},
          {"fit_residual_max", {0.5, "maximum log-RMS residual of the exponent fit"}},
          {"borell_ratio_max", {3.0, "maximum Borell moment ratio"}},
          {"subgaussian_slack", {1.05, "factor on 1/sqrt(t) for the tilted subgaussian norm"}},
          {"bound_abs", {1e-12, "closed-form bound arithmetic (relative to max(1, value))"}},
          {"slicing_exact_abs", {1e-6, "isotropic constants of exact bodies"}},
          {"slicing_z", {3.0, "Monte-Carlo slicing quantities, in standard errors"}},
          {"reduction_spectrum_slack", {0.05, "slack around the [1/2, 2] covariance sandwich"}},
          {"reduction_mass_z", {3.0, "conditioning mass vs 1 - 1/(4 c0^2), in standard errors"}},
      } {}

double Tolerances::operator[](std::string_view name) const {
  const auto it = table_.find(std::string(name));
  if (it == table_.end()) throw Error("cli", "unknown tolerance '" + std::string(name) + "'");
  return it->second.value;
}

void Tolerances::set(const std::string& name, double value) {
  auto it = table_.find(name);
  if (it == table_.end()) throw Error("cli", "unknown tolerance '" + name + "'");
  it->second.value = value;
}

std::vector<std::string> Tolerances::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : table_) out.push_back(k);
  return out;
}

}  // namespace locball::experiments
