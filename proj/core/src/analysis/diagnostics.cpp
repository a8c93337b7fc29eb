#include "locball/analysis/diagnostics.hpp"

#include "locball/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace locball::analysis {

Vector random_unit_vector(int dimension, Rng& rng) {
  Vector u(dimension);
  do {
    for (int i = 0; i < dimension; ++i) u[i] = rng.normal();
  } while (u.squaredNorm() == 0.0);
  return u.normalized();
}

RatioEstimate borell_ratio_estimate(const Family& family, const Vector& direction, double p,
                                    std::size_t samples, Seed seed) {
  if (!(p >= 2.0)) throw Error("analysis", "Borell ratio needs p >= 2");
  if (samples < 2) throw Error("analysis", "Borell ratio needs at least two samples");
  if (direction.size() != family.dimension() || direction.isZero(0.0)) {
    throw Error("analysis", "direction must be a nonzero vector of the family's dimension");
  }
  const Vector u = direction.normalized();

  const std::size_t chunks = (samples + sample_chunk_size - 1) / sample_chunk_size;
  // Per chunk: sum |Y|^p, sum Y^2, sum |Y|^{2p}, sum Y^4, sum |Y|^{p+2}.
  std::vector<std::array<double, 5>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t len = std::min(sample_chunk_size, samples - c * sample_chunk_size);
    const Vector y = sample_chunk(family, seed, c, len).transpose() * u;
    std::array<double, 5> s{};
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      const double a = std::abs(y[j]);
      const double ap = std::pow(a, p);
      const double a2 = a * a;
      s[0] += ap;
      s[1] += a2;
      s[2] += ap * ap;
      s[3] += a2 * a2;
      s[4] += ap * a2;
    }
    partial[c] = s;
  });
  std::array<double, 5> s{};
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < 5; ++i) s[i] += part[i];
  }
  const double n = static_cast<double>(samples);
  const double mp = s[0] / n;
  const double m2 = s[1] / n;
  const double var_p = (s[2] / n - mp * mp) / n;
  const double var_2 = (s[3] / n - m2 * m2) / n;
  const double cov = (s[4] / n - mp * m2) / n;

  const double ratio = std::pow(mp, 2.0 / p) / m2;
  const double d_mp = (2.0 / p) * std::pow(mp, 2.0 / p - 1.0) / m2;
  const double d_m2 = -ratio / m2;
  const double var = d_mp * d_mp * var_p + d_m2 * d_m2 * var_2 + 2.0 * d_mp * d_m2 * cov;
  return {ratio, std::sqrt(std::max(0.0, var))};
}

double borell_ratio(const Family& family, const Vector& direction, double p, std::size_t samples,
                    Seed seed) {
  return borell_ratio_estimate(family, direction, p, samples, seed).value;
}

BorellSurvey borell_survey(const Family& family, const std::vector<double>& exponents,
                           std::size_t directions, std::size_t samples, Seed seed) {
  BorellSurvey survey;
  Rng rng(seed, {0x646972});  // "dir"
  for (std::size_t d = 0; d < directions; ++d) {
    const Vector u = random_unit_vector(family.dimension(), rng);
    for (std::size_t k = 0; k < exponents.size(); ++k) {
      const RatioEstimate r = borell_ratio_estimate(family, u, exponents[k], samples, derive_seed(seed, {d}));
      survey.ratios.push_back(r);
      if (r.value > survey.max_ratio) {
        survey.max_ratio = r.value;
        survey.max_ratio_stderr = r.std_error;
        survey.worst_p = exponents[k];
      }
    }
  }
  return survey;
}

double tilted_directional_moment(const SamplePool& pool, const TiltState& state, const Vector& u,
                                 double p) {
  const Vector w = importance_weights(pool, state);
  const double ess = effective_sample_size(w);
  if (ess < static_cast<double>(pool.size()) / 100.0) {
    throw EssError("effective sample size " + std::to_string(ess) + " below budget/100", ess);
  }
  const Vector mean = pool.points * w;
  const Vector proj = (pool.points.colwise() - mean).transpose() * u;
  double moment = 0.0;
  for (Eigen::Index j = 0; j < proj.size(); ++j) moment += w[j] * std::pow(std::abs(proj[j]), p);
  return std::pow(moment, 1.0 / p);
}

double subgaussian_norm(const Family& family, double t, const Vector& theta, int p_max,
                        std::size_t samples, Seed seed) {
  if (!(t > 0.0)) throw Error("analysis", "subgaussian_norm needs t > 0");
  if (p_max < 2 || p_max % 2 != 0) throw Error("analysis", "p_max must be an even integer >= 2");
  if (!family.supports(Backend::sampling)) throw Error("analysis", "family has no sampler");
  const SamplePool pool = make_pool(family, samples, seed);
  const TiltState state{t, theta};
  Rng rng(seed, {0x646972});
  double worst = 0.0;
  for (int d = 0; d < 8; ++d) {
    const Vector u = random_unit_vector(family.dimension(), rng);
    for (int p = 2; p <= p_max; p += 2) {
      const double m = tilted_directional_moment(pool, state, u, p);
      worst = std::max(worst, m / std::sqrt(static_cast<double>(p)));
    }
  }
  return worst;
}

}  // namespace locball::analysis
