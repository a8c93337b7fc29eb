#pragma once

#include "locball/measures.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace locball {

/// Parameters (t, theta) of the tilted law
///   f_{t,theta}(x) ∝ exp(-t|x|^2/2 + theta·x) f(x).
struct TiltState {
  double t = 0.0;
  Vector theta;

  static TiltState origin(int dimension) { return {0.0, Vector::Zero(dimension)}; }
};

/// Barycenter and covariance of a tilted law plus backend diagnostics.
struct TiltedMoments {
  Vector barycenter;
  Matrix covariance;
  Backend backend = Backend::closed_form;
  /// Effective sample size (sampling backend only; 0 otherwise).
  double ess = 0.0;
  /// Summed quadrature error estimate (quadrature backend only).
  double quadrature_error = 0.0;
  /// Per-coordinate standard error of the barycenter (sampling backend only;
  /// zero for deterministic backends).
  Vector barycenter_stderr;
};

/// Draws from the base law reused across importance-sampling evaluations.
struct SamplePool {
  Matrix points;
  Vector squared_norms;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.cols()); }
};

SamplePool make_pool(const Family& family, std::size_t budget, Seed seed);

/// Self-normalized importance weights exp(-t|x|^2/2 + theta·x) over the
/// pool, computed in log space with the maximum subtracted. Sums to one.
Vector importance_weights(const SamplePool& pool, const TiltState& state);

/// Effective sample size (sum w)^2 / sum w^2 of normalized weights.
double effective_sample_size(const Vector& normalized_weights);

/// Tilted moments of `family` at `state`. The backend must be legal for the
/// family: closed_form for Gaussian laws, quadrature for coordinate-product
/// laws, sampling for any law with a sampler. The sampling backend draws
/// `budget` points with `seed` and throws EssError when ESS < budget/100.
TiltedMoments tilted_moments(const Family& family, const TiltState& state, Backend backend,
                             std::size_t budget = 0, Seed seed = 0);

/// Most exact legal backend: closed_form, then quadrature, then sampling.
Backend preferred_backend(const Family& family) noexcept;

/// Sampling-backend moments over an existing pool.
TiltedMoments tilted_moments(const SamplePool& pool, const TiltState& state);

/// One-dimensional tilted moments of a product factor by adaptive
/// Gauss-Legendre quadrature.
struct FactorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double error_estimate = 0.0;
};
FactorMoments tilted_factor_moments(const CoordinateFactor& factor, double t, double theta);

/// Tilted probability that one coordinate lies in [lo, hi].
double tilted_factor_probability(const CoordinateFactor& factor, double t, double theta, double lo,
                                 double hi);

/// Euler-Maruyama update theta' = theta + a dt + noise, t' = t + dt, with
/// the drift a already computed.
TiltState step(const TiltState& state, const Vector& drift, double dt, const Vector& noise);

/// Same as above, computing the drift with the requested backend.
TiltState step(const Family& family, const TiltState& state, double dt, const Vector& noise,
               Backend backend, std::size_t budget = 0, Seed seed = 0);

/// sqrt(dt)·N(0, I) for step `step_index` of path `path_index`.
Vector brownian_increment(int dimension, double dt, Seed seed, std::size_t path_index,
                          std::size_t step_index);

struct PathOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  Backend backend = Backend::closed_form;
  /// Importance-sampling pool size (sampling backend).
  std::size_t budget = 0;
  /// Record moments every this many steps (the final state is always recorded).
  std::size_t record_every = 1;
};

struct LocalizationPath {
  std::vector<double> times;
  std::vector<TiltState> states;
  std::vector<TiltedMoments> moments;
  Seed seed = 0;
  std::size_t path_index = 0;
  std::optional<Family> family;
};

/// Integrates the tilt SDE d theta = a_{t,theta} dt + dB from (0, 0) to the
/// horizon with steps of size horizon / ceil(horizon / dt). Noise for step k
/// comes from stream (seed, path_index, k) and the sampling pool from
/// (seed, path_index), so the path is bit-reproducible.
LocalizationPath run_path(const Family& family, const PathOptions& options, Seed seed,
                          std::size_t path_index = 0);

/// Independent paths 0..paths-1; identical for any worker count.
std::vector<LocalizationPath> run_ensemble(const Family& family, const PathOptions& options,
                                           std::size_t paths, Seed seed);

struct PathOutcome {
  std::optional<LocalizationPath> path;
  std::string failure;  // set when the path aborted (e.g. ESS gate)
};

/// Like run_ensemble but records per-path failures instead of throwing.
std::vector<PathOutcome> run_ensemble_tolerant(const Family& family, const PathOptions& options,
                                               std::size_t paths, Seed seed);

/// A measurable set for measure_under_tilt.
struct Region {
  enum class Shape { whole_space, ball, halfspace };

  Shape shape = Shape::whole_space;
  Vector center;  // ball
  double radius = 0.0;
  Vector normal;  // halfspace {x : normal·x >= offset}
  double offset = 0.0;

  static Region whole_space() { return {}; }
  static Region ball(Vector center, double radius);
  static Region centered_ball(int dimension, double radius);
  static Region halfspace(Vector normal, double offset);

  bool contains(const Eigen::Ref<const Vector>& x) const;
  std::string describe() const;
};

struct ProbabilityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
  std::size_t hits = 0;
};

/// `count` exact draws (columns) from the tilted law of a coordinate-product
/// family, by inverting tabulated distribution functions of each tilted
/// coordinate. Coordinate i uses stream (seed, i).
Matrix sample_tilted_product(const Family& family, const TiltState& state, std::size_t count, Seed seed);

/// mu_{t,theta}(S). Sampling: self-normalized importance sampling with a
/// delta-method standard error. Quadrature (product laws only): exact for
/// coordinate-aligned halfspaces; other regions use `budget` direct draws
/// from sample_tilted_product with a binomial standard error.
ProbabilityEstimate measure_under_tilt(const Family& family, const TiltState& state,
                                       const Region& region, std::size_t budget, Seed seed,
                                       Backend backend = Backend::sampling);

/// Same estimate over an existing pool.
ProbabilityEstimate measure_under_tilt(const SamplePool& pool, const TiltState& state,
                                       const Region& region);

}  // namespace locball
