#include "locball/analysis/estimators.hpp"

#include "locball/parallel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace locball::analysis {

Interval wilson_interval(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) throw Error("analysis", "Wilson interval needs at least one trial");
  if (hits > trials) throw Error("analysis", "hits exceed trials");
  if (hits == 0) return {0.0, zero_hit_upper_bound(trials)};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

double zero_hit_upper_bound(std::size_t trials, double alpha) {
  return -std::expm1(std::log(alpha) / static_cast<double>(trials));
}

double SmallBallEstimate::std_error() const {
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(samples));
}

std::vector<SmallBallEstimate> small_ball_table(const Family& family, const Vector& center,
                                                std::span<const double> radii, std::size_t samples,
                                                Seed seed) {
  if (samples == 0) throw Error("analysis", "small-ball estimate needs N >= 1");
  if (center.size() != family.dimension()) throw Error("analysis", "center has the wrong dimension");
  for (double r : radii) {
    if (!(r >= 0.0)) throw Error("analysis", "small-ball radius must be nonnegative");
  }

  const std::size_t chunks = (samples + sample_chunk_size - 1) / sample_chunk_size;
  const std::size_t k = radii.size();
  std::vector<std::size_t> counts(chunks * k, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t len = std::min(sample_chunk_size, samples - c * sample_chunk_size);
    const Matrix pts = sample_chunk(family, seed, c, len);
    const Eigen::ArrayXd d2 = (pts.colwise() - center).colwise().squaredNorm().transpose().array();
    for (std::size_t i = 0; i < k; ++i) {
      counts[c * k + i] = static_cast<std::size_t>((d2 <= radii[i] * radii[i]).count());
    }
  });

  std::vector<SmallBallEstimate> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    SmallBallEstimate e;
    e.family = family.name();
    e.dimension = family.dimension();
    e.center = center;
    e.radius = radii[i];
    e.samples = samples;
    e.seed = seed;
    for (std::size_t c = 0; c < chunks; ++c) e.hits += counts[c * k + i];
    e.p_hat = static_cast<double>(e.hits) / static_cast<double>(samples);
    const Interval ci = wilson_interval(e.hits, samples);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
    out.push_back(std::move(e));
  }
  return out;
}

SmallBallEstimate small_ball_estimate(const Family& family, const Vector& center, double radius,
                                      std::size_t samples, Seed seed) {
  const double radii[] = {radius};
  return small_ball_table(family, center, radii, samples, seed).front();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi_square_cdf(double dof, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

GaussianSmallBall gaussian_small_ball_oracle(int n, double epsilon) {
  if (n < 1) throw Error("analysis", "dimension must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("analysis", "epsilon must lie in (0, 1)");
  GaussianSmallBall out;
  out.exact = chi_square_cdf(n, epsilon * n);
  out.chernoff = std::exp(0.5 * n * (std::log(epsilon) + 1.0 - epsilon));
  return out;
}

}  // namespace locball::analysis
