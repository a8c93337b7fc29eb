#pragma once

#include "locball/measures.hpp"

#include <cstddef>
#include <utility>

namespace locball {

/// Summary of a reduction run: the working Borell constant, the estimated
/// mass of the conditioning ball, the spectrum range of the estimated
/// covariance after conditioning, and the support radius of the output.
struct ReductionReport {
  double c0_constant_used = 0.0;
  double conditioning_mass = 0.0;
  double conditioning_mass_stderr = 0.0;
  std::pair<double, double> covariance_spectrum_bounds{0.0, 0.0};
  double final_support_radius = 0.0;
};

struct ConditionedFamily {
  Family family;
  double mass;
  double mass_stderr;
};

/// Law of (X - X')/sqrt(2). The output has no closed-form density, so only
/// the sampling backend is legal for it downstream.
Family symmetrize(const Family& family);

/// Conditional law X | |X| <= radius, plus a Monte-Carlo estimate of
/// P(|X| <= radius) from `mass_samples` draws.
ConditionedFamily condition_to_ball(const Family& family, double radius, Seed seed,
                                    std::size_t mass_samples = 100'000);

/// Empirical covariance of `count` draws, symmetrized; PSD by construction.
Matrix estimate_covariance(const Family& family, std::size_t count, Seed seed);

/// Law of Cov^{-1/2} X. Identity input returns the family unchanged.
/// Throws SingularCovarianceError when the smallest eigenvalue is <= 1e-12.
Family whiten(const Family& family, const Matrix& covariance);

/// Default number of draws for the covariance estimate inside `reduce`.
std::size_t default_covariance_samples(int dimension);

struct ReductionResult {
  Family family;
  ReductionReport report;
};

/// symmetrize -> condition_to_ball(2 c0 sqrt(n)) -> whiten(estimated covariance).
ReductionResult reduce(const Family& family, double c0_constant, Seed seed);

}  // namespace locball
