#include "locball/reduction.hpp"

#include "locball/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace locball {

Family symmetrize(const Family& family) { return Family::symmetrized(family); }

ConditionedFamily condition_to_ball(const Family& family, double radius, Seed seed,
                                    std::size_t mass_samples) {
  if (!(radius > 0.0)) throw Error("reduction", "conditioning radius must be positive");
  if (mass_samples == 0) throw Error("reduction", "mass estimate needs at least one sample");

  const double r2 = radius * radius;
  const std::size_t chunks = (mass_samples + sample_chunk_size - 1) / sample_chunk_size;
  std::vector<std::size_t> inside(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t len = std::min(sample_chunk_size, mass_samples - c * sample_chunk_size);
    const Matrix pts = sample_chunk(family, seed, c, len);
    inside[c] = static_cast<std::size_t>((pts.colwise().squaredNorm().array() <= r2).count());
  });
  std::size_t hits = 0;
  for (auto h : inside) hits += h;

  const double n = static_cast<double>(mass_samples);
  const double mass = static_cast<double>(hits) / n;
  const double stderr_mass = std::sqrt(mass * (1.0 - mass) / n);
  if (hits == 0) {
    std::ostringstream msg;
    msg << "no draw of " << family.name() << " fell inside the ball of radius " << radius;
    throw SamplingError(msg.str(), 0.0);
  }
  return {Family::restricted(family, radius), mass, stderr_mass};
}

Matrix estimate_covariance(const Family& family, std::size_t count, Seed seed) {
  if (count < static_cast<std::size_t>(family.dimension())) {
    throw Error("reduction", "covariance estimate needs count >= dimension");
  }
  return empirical_moments(sample(family, count, seed)).covariance;
}

Family whiten(const Family& family, const Matrix& covariance) {
  const int n = family.dimension();
  if (covariance.rows() != n || covariance.cols() != n) {
    throw Error("reduction", "covariance shape does not match the family dimension");
  }
  if (covariance.isIdentity(0.0)) return family;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (covariance + covariance.transpose()));
  const Vector& values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] > 1e-12)) {
      std::ostringstream msg;
      msg << "covariance is singular: eigenvalue " << i << " equals " << values[i];
      throw SingularCovarianceError(msg.str(), values[i]);
    }
  }
  const Matrix inv_sqrt =
      eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return Family::affine(family, inv_sqrt, Vector::Zero(n));
}

std::size_t default_covariance_samples(int dimension) {
  const std::size_t n = static_cast<std::size_t>(dimension);
  return std::max<std::size_t>(200 * n * n, 200'000);
}

ReductionResult reduce(const Family& family, double c0_constant, Seed seed) {
  if (!(c0_constant > 0.0)) throw Error("reduction", "c0 constant must be positive");
  const int n = family.dimension();

  const Family sym = symmetrize(family);
  const double radius = 2.0 * c0_constant * std::sqrt(static_cast<double>(n));
  const ConditionedFamily conditioned = condition_to_ball(sym, radius, derive_seed(seed, {1}));

  const Matrix cov = estimate_covariance(conditioned.family, default_covariance_samples(n),
                                         derive_seed(seed, {2}));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const Family white = whiten(conditioned.family, cov);

  ReductionReport report;
  report.c0_constant_used = c0_constant;
  report.conditioning_mass = conditioned.mass;
  report.conditioning_mass_stderr = conditioned.mass_stderr;
  report.covariance_spectrum_bounds = {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
  report.final_support_radius = white.support_radius();
  return {white, report};
}

}  // namespace locball
