#pragma once

#include "locball/localization.hpp"
#include "locball/measures.hpp"

#include <cstddef>
#include <vector>

namespace locball::analysis {

struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Uniformly random point of the unit sphere.
Vector random_unit_vector(int dimension, Rng& rng);

/// (E|X·u|^p)^{2/p} / E|X·u|^2 from N draws, with a delta-method error.
RatioEstimate borell_ratio_estimate(const Family& family, const Vector& direction, double p,
                                    std::size_t samples, Seed seed);

double borell_ratio(const Family& family, const Vector& direction, double p, std::size_t samples,
                    Seed seed);

/// Worst observed Borell ratio over `directions` random unit directions for
/// each p in `exponents`.
struct BorellSurvey {
  double max_ratio = 0.0;
  double max_ratio_stderr = 0.0;
  double worst_p = 0.0;
  std::vector<RatioEstimate> ratios;  // directions x exponents, row-major
};
BorellSurvey borell_survey(const Family& family, const std::vector<double>& exponents,
                           std::size_t directions, std::size_t samples, Seed seed);

/// (E|(Y - EY)·u|^p)^{1/p} for Y drawn from the tilted law at `state`,
/// estimated by importance sampling over `pool`.
double tilted_directional_moment(const SamplePool& pool, const TiltState& state, const Vector& u,
                                 double p);

/// max over p in {2, 4, ..., p_max} and 8 random unit directions of
/// (E|(Y - EY)·u|^p)^{1/p} / sqrt(p) under the tilted law at (t, theta).
/// The strong log-concavity of the tilt predicts a value <= 1/sqrt(t).
double subgaussian_norm(const Family& family, double t, const Vector& theta, int p_max,
                        std::size_t samples, Seed seed);

}  // namespace locball::analysis
