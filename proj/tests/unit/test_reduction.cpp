#include <doctest.h>

#include "locball/analysis/estimators.hpp"
#include "locball/reduction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace locball;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::VectorXd eigenvalues(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_SUITE("reduction") {
  TEST_CASE("symmetrized Gaussian stays standard") {
    const Matrix x = sample(symmetrize(Family::gaussian(3)), 100000, 1);
    const Matrix c = empirical_moments(x).covariance;
    CHECK((c - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.03);
  }

  TEST_CASE("symmetrized Laplace is isotropic") {
    const std::size_t N = 100000;
    const Matrix x = sample(symmetrize(Family::product_laplace(1)), N, 2);
    CHECK(std::abs(x.mean()) <= 4.0 / std::sqrt(double(N)));
    CHECK(empirical_moments(x).covariance(0, 0) == doctest::Approx(1.0).epsilon(0.03));
  }

  TEST_CASE("symmetrized cube has vanishing odd moments") {
    const std::size_t N = 100000;
    const Matrix x = sample(symmetrize(Family::uniform_cube(2)), N, 3);
    for (int i = 0; i < 2; ++i) {
      const Eigen::ArrayXd c = x.row(i).array().cube();
      const double m = c.mean();
      const double se = std::sqrt((c - m).square().sum() / (N - 1.0) / N);
      CHECK(std::abs(m) <= 3.0 * se);
    }
  }

  TEST_CASE("conditioning a Gaussian to a huge ball changes nothing") {
    const auto c = condition_to_ball(Family::gaussian(1), 1e6, 4);
    CHECK(c.mass == doctest::Approx(1.0));
    // Kolmogorov-Smirnov distance to the standard normal CDF.
    const Matrix x = sample(c.family, 10000, 5);
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double F = phi(v[i]);
      d = std::max({d, std::abs(F - double(i) / v.size()), std::abs(F - double(i + 1) / v.size())});
    }
    CHECK(d < 0.02);
  }

  TEST_CASE("conditioning masses match exact oracles") {
    const auto g = condition_to_ball(Family::gaussian(1), 1.0, 6);
    const double exact_g = 2.0 * phi(1.0) - 1.0;
    CHECK(std::abs(g.mass - exact_g) <= 3.0 * g.mass_stderr);
    CHECK(exact_g == doctest::Approx(0.6827).epsilon(1e-4));
    CHECK(g.family.support_radius() == doctest::Approx(1.0));

    const auto c = condition_to_ball(Family::uniform_cube(2), std::sqrt(3.0), 7);
    CHECK(std::abs(c.mass - std::numbers::pi / 4.0) <= 3.0 * c.mass_stderr);
    const Matrix x = sample(c.family, 2000, 8);
    for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK_UNARY(x.col(j).norm() <= std::sqrt(3.0) + 1e-12);
  }

  TEST_CASE("conditioning errors") {
    CHECK_THROWS_AS(condition_to_ball(Family::gaussian(2), 0.0, 1), Error);
    CHECK_THROWS_AS(condition_to_ball(Family::gaussian(2), 1e-9, 1), SamplingError);
  }

  TEST_CASE("covariance estimation") {
    const auto ev = eigenvalues(estimate_covariance(Family::gaussian(3), 1000000, 9));
    CHECK(ev.minCoeff() >= 0.99);
    CHECK(ev.maxCoeff() <= 1.01);

    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = 2.0;
    M(1, 1) = 1.0;
    const auto t = Family::affine(Family::gaussian(2), M, Vector::Zero(2));
    const auto et = eigenvalues(estimate_covariance(t, 1000000, 10));
    CHECK(et[0] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(et[1] == doctest::Approx(4.0).epsilon(0.01));

    CHECK_THROWS_AS(estimate_covariance(Family::gaussian(3), 2, 1), Error);
    // constant data has zero covariance
    const Matrix constant = Matrix::Constant(3, 3, 1.5);
    CHECK(empirical_moments(constant).covariance.isZero());
  }

  TEST_CASE("whitening") {
    const auto base = Family::uniform_cube(2);
    const auto same = whiten(base, Matrix::Identity(2, 2));
    CHECK(same.name() == base.name());
    CHECK(same.kind() == base.kind());

    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = 2.0;
    M(1, 1) = 1.0;
    const auto t = Family::affine(Family::gaussian(2), M, Vector::Zero(2));
    const auto w = whiten(t, M * M);
    const Matrix c = empirical_moments(sample(w, 200000, 11)).covariance;
    CHECK((c - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.01);

    const auto cond = condition_to_ball(Family::uniform_cube(2), 2.0, 12).family;
    const auto wc = whiten(cond, estimate_covariance(cond, 200000, 13));
    const Matrix cc = empirical_moments(sample(wc, 200000, 14)).covariance;
    CHECK((cc - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.03);
    CHECK(wc.support_radius() > cond.support_radius());

    Matrix singular = Matrix::Identity(2, 2);
    singular(1, 1) = 1e-14;
    try {
      (void)whiten(base, singular);
      FAIL("expected SingularCovarianceError");
    } catch (const SingularCovarianceError& e) {
      CHECK(e.eigenvalue() == doctest::Approx(1e-14));
    }
  }

  TEST_CASE("reduce on a Gaussian") {
    const auto r = reduce(Family::gaussian(4), 3.0, 15);
    CHECK(r.report.c0_constant_used == 3.0);
    CHECK(r.report.conditioning_mass >= 1.0 - 1.0 / 36.0 - 3.0 * r.report.conditioning_mass_stderr);
    CHECK(r.report.final_support_radius <= 6.0 * std::sqrt(2.0) * 2.0 + 1e-9);
    CHECK(r.family.bounded());
    CHECK(r.report.covariance_spectrum_bounds.first >= 0.5 - 0.05);
    CHECK(r.report.covariance_spectrum_bounds.second <= 2.0 + 0.05);
  }

  TEST_CASE("reduce on Laplace n=8 sandwiches the spectrum") {
    const auto r = reduce(Family::product_laplace(8), 3.0, 16);
    CHECK(r.report.covariance_spectrum_bounds.first >= 0.45);
    CHECK(r.report.covariance_spectrum_bounds.second <= 2.05);
    const Matrix x = sample(r.family, 20000, 17);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      CHECK_UNARY(x.col(j).norm() <= r.report.final_support_radius + 1e-9);
    }
    const Matrix c = empirical_moments(sample(r.family, 100000, 18)).covariance;
    CHECK((c - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 0.05);
  }

  TEST_CASE("reduce with a vacuous radius matches symmetrization") {
    const auto r = reduce(Family::gaussian(1), 1e6, 19);
    CHECK(r.report.conditioning_mass == doctest::Approx(1.0));
    const Matrix x = sample(r.family, 10000, 20);
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double F = phi(v[i]);
      d = std::max({d, std::abs(F - double(i) / v.size()), std::abs(F - double(i + 1) / v.size())});
    }
    CHECK(d < 0.03);
  }

  TEST_CASE("small-ball mass does not collapse across the chain") {
    const int n = 4;
    const auto base = Family::uniform_cube(n);
    const auto r = reduce(base, 3.0, 21);
    for (double eps : {0.1, 0.2}) {
      const double rad = eps * std::sqrt(double(n));
      const auto before = analysis::small_ball_estimate(base, Vector::Zero(n), rad, 200000, 22);
      const auto after = analysis::small_ball_estimate(r.family, Vector::Zero(n), 2.0 * rad, 200000, 23);
      const double se = std::hypot(2.0 * before.p_hat * before.std_error(), after.std_error());
      CHECK(before.p_hat * before.p_hat <= after.p_hat + 4.0 * se);
    }
  }

  TEST_CASE("default covariance sample count") {
    CHECK(default_covariance_samples(2) >= 200u * 4u);
    CHECK(default_covariance_samples(64) == 200u * 64u * 64u);
  }
}
