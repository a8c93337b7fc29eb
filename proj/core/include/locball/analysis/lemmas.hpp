#pragma once

#include "locball/analysis/estimators.hpp"
#include "locball/localization.hpp"
#include "locball/measures.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace locball::analysis {

// ---------------------------------------------------------------------------
// Martingale conservation: E[ E_{mu_t} phi ] = E_mu phi for every t.

struct MartingaleOptions {
  std::vector<double> times{0.25, 0.5, 1.0};
  double dt = 1e-3;
  std::size_t paths = 256;
  Backend backend = Backend::quadrature;
  std::size_t budget = 0;                    // path pool (sampling backend)
  std::size_t region_budget = 20'000;        // ball-indicator importance sampling
  std::size_t reference_samples = 1'000'000; // t = 0 Monte-Carlo references
  std::size_t record_every = 10;
  double z_threshold = 4.0;
};

struct MartingaleEntry {
  std::string function;  // "x.e1", "|x|^2", "1{|x|<=sqrt(n)}"
  double time = 0.0;
  double ensemble_mean = 0.0;
  double ensemble_stderr = 0.0;
  double reference = 0.0;
  double reference_stderr = 0.0;
  double z = 0.0;
  bool passed = false;
};

struct MartingaleReport {
  std::vector<MartingaleEntry> entries;
  bool passed = false;
};

/// Path options that record every requested time.
PathOptions martingale_path_options(const MartingaleOptions& options);

MartingaleReport martingale_check(const Family& family, std::span<const LocalizationPath> paths,
                                  const MartingaleOptions& options, Seed seed);

MartingaleReport martingale_check(const Family& family, const MartingaleOptions& options, Seed seed);

// ---------------------------------------------------------------------------
// Almost-sure covariance bound A_t <= I/t.

struct CovarianceBoundReport {
  std::size_t states_checked = 0;
  std::size_t violations = 0;
  double worst_excess = -1e300;  // max over states of lambda_max(A_t) - 1/t
  double worst_time = 0.0;
  bool passed() const { return violations == 0; }
};

CovarianceBoundReport covariance_bound_check(std::span<const LocalizationPath> paths, double tolerance);

// ---------------------------------------------------------------------------
// Shrinkage of sets along the process.

struct ShrinkageOptions {
  double horizon = 0.25;
  double dt = 1e-3;
  std::size_t paths = 256;
  double lambda = 2.0;
  Backend backend = Backend::sampling;
  std::size_t budget = 20'000;          // path pool
  std::size_t region_budget = 100'000;  // g_T importance sampling
  std::size_t base_samples = 1'000'000; // g_0 Monte Carlo
};

struct ShrinkageReport {
  double diameter = 0.0;
  double g0 = 0.0;
  double g0_stderr = 0.0;
  // E log(1/g_T) <= log(1/g_0) + D^2 T / 2
  double mean_log_inverse_gT = 0.0;
  double mean_log_inverse_gT_stderr = 0.0;
  double integrated_bound = 0.0;
  bool integrated_passed = false;
  // P( mu(S) <= e^{D^2 T/2} g_T^{1/lambda} ) >= 1 - 1/lambda
  double event_frequency = 0.0;
  double event_target = 0.0;
  double event_stderr = 0.0;
  bool event_passed = false;
  std::size_t failed_paths = 0;
  std::vector<double> gT;

  bool passed() const { return integrated_passed && event_passed && failed_paths == 0; }
};

ShrinkageReport shrinkage_check(const Family& family, const Region& region,
                                const ShrinkageOptions& options, Seed seed);

// ---------------------------------------------------------------------------
// Trace of the covariance at a fixed time.

struct GuanResult {
  double mean_trace = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  int dimension = 0;
  double t_star = 0.0;
  /// Paths stopped by the ESS gate; the mean covers the remaining ones.
  std::size_t failed_paths = 0;
  std::string first_failure;
};

GuanResult guan_trace_check(const Family& family, double t_star, double dt, std::size_t paths,
                            Backend backend, std::size_t budget, Seed seed);

/// mean_trace >= c n with no failed paths.
bool trace_lower_bound_holds(const GuanResult& result, double c);

// ---------------------------------------------------------------------------
// Replay of the small-ball argument on a bounded-support law.

struct CertificateOptions {
  double c1 = 0.5;
  double lambda = 4.0;
  double epsilon = 0.05;
  double dt = 1e-2;
  std::size_t paths = 256;
  std::size_t budget = 20'000;          // path pool
  std::size_t region_budget = 100'000;  // mu_t(S_eps)
  std::size_t base_samples = 1'000'000; // mu(S_eps)
  double c_paouris = 1.0;               // constant in the projected bound
  double z_binomial = 3.0;
};

struct CertificatePath {
  std::size_t index = 0;
  double trace = 0.0;
  double lambda_max = 0.0;
  bool in_e0 = false;
  ProbabilityEstimate tilted_mass;
  double projected_bound = 1.0;  // evaluated only on E0
  bool bound_holds = true;
  bool in_e1 = false;
};

struct CertificateReport {
  int dimension = 0;
  double c1 = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double diameter = 0.0;
  std::size_t paths = 0;
  std::size_t ess_failures = 0;
  std::vector<std::string> failure_messages;

  // (a) P(E0) >= c1^2 / 2 with E0 = {Tr(A_{c1}) >= c1 n / 2}
  double p_e0 = 0.0;
  double p_e0_stderr = 0.0;
  double p_e0_target = 0.0;
  bool verdict_e0 = false;

  // (b) projected bound with b = 1/sqrt(c1) dominates mu_t(S_eps) on E0
  std::size_t bound_checked = 0;
  std::size_t bound_violations = 0;
  bool verdict_bound = false;

  // (c) P(E1) >= 1 - 1/lambda
  SmallBallEstimate base_mass;
  double base_mass_upper = 0.0;  // p_hat, or the zero-hit bound
  double p_e1 = 0.0;
  double p_e1_stderr = 0.0;
  double p_e1_target = 0.0;
  bool verdict_e1 = false;

  /// Smallest implied bound on mu(S_eps) over paths in E0 ∩ E1, as a log.
  double log_implied_bound = 0.0;
  bool implied_bound_available = false;

  std::vector<CertificatePath> path_details;

  bool passed() const { return verdict_e0 && verdict_bound && verdict_e1; }
};

CertificateReport assemble_certificate(const Family& family, const CertificateOptions& options, Seed seed);

}  // namespace locball::analysis
