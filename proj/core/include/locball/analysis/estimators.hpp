#pragma once

#include "locball/measures.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace locball::analysis {

inline constexpr double z95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `hits` successes out of `trials`.
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = z95);

/// Exact one-sided upper confidence bound 1 - alpha^{1/N} after zero hits.
double zero_hit_upper_bound(std::size_t trials, double alpha = 0.05);

/// Monte-Carlo estimate of P(|X - center| <= radius).
struct SmallBallEstimate {
  std::string family;
  int dimension = 0;
  Vector center;
  double radius = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  Seed seed = 0;

  double std_error() const;
  bool covers(double value) const { return ci_low <= value && value <= ci_high; }
};

/// p_hat = hits / N with a 95% Wilson interval; with zero hits the upper
/// end is the exact zero-hit bound.
SmallBallEstimate small_ball_estimate(const Family& family, const Vector& center, double radius,
                                      std::size_t samples, Seed seed);

/// Estimates for several radii from one shared sample (common random
/// numbers, so estimates are nondecreasing in the radius).
std::vector<SmallBallEstimate> small_ball_table(const Family& family, const Vector& center,
                                                std::span<const double> radii, std::size_t samples,
                                                Seed seed);

double normal_cdf(double x);
/// P(chi^2_dof <= x) via the regularized lower incomplete gamma function.
double chi_square_cdf(double dof, double x);

struct GaussianSmallBall {
  double exact = 0.0;     // P(chi^2_n <= eps n)
  double chernoff = 0.0;  // (eps e^{1 - eps})^{n/2}
};

GaussianSmallBall gaussian_small_ball_oracle(int n, double epsilon);

}  // namespace locball::analysis
