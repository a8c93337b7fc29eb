#include <doctest.h>

#include "locball/measures.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace locball;

namespace {

std::vector<Family> zoo(int n) {
  return {Family::gaussian(n), Family::uniform_cube(n), Family::uniform_ball(n),
          Family::uniform_simplex(n), Family::product_laplace(n)};
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("sampling is a deterministic function of the seed") {
    const auto f = Family::gaussian(2);
    const Matrix a = sample(f, 3, 7);
    const Matrix b = sample(f, 3, 7);
    CHECK(a.cols() == 3);
    CHECK(a.rows() == 2);
    CHECK((a.array() == b.array()).all());
    CHECK_FALSE((a.array() == sample(f, 3, 8).array()).all());
    // prefix property
    const Matrix longer = sample(f, 5000, 7);
    CHECK((longer.leftCols(3).array() == a.array()).all());
  }

  TEST_CASE("cube coordinate variance") {
    const Matrix x = sample(Family::uniform_cube(4), 100000, 1);
    for (int i = 0; i < 4; ++i) {
      const double mean = x.row(i).mean();
      const double var = (x.row(i).array() - mean).square().mean();
      CHECK(var >= 0.97);
      CHECK(var <= 1.03);
    }
  }

  TEST_CASE("Laplace fourth moment is 6") {
    const std::size_t N = 1000000;
    const Matrix x = sample(Family::product_laplace(1), N, 2);
    const Eigen::ArrayXd x4 = x.row(0).array().pow(4);
    const double m = x4.mean();
    const double se = std::sqrt((x4 - m).square().sum() / (N - 1.0) / N);
    CHECK(std::abs(m - 6.0) <= 3.0 * se);
  }

  TEST_CASE("log-density examples") {
    const auto g = Family::gaussian(1);
    const double v = g.log_density(Vector::Zero(1)) + *g.log_normalizer();
    CHECK(v == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));

    Vector out(2);
    out << 5.0, 0.0;
    CHECK(Family::uniform_cube(2).log_density(out) == -std::numeric_limits<double>::infinity());

    const auto lap = Family::product_laplace(2);
    Vector ones = Vector::Ones(2);
    CHECK(lap.log_density(ones) - lap.log_density(Vector::Zero(2)) ==
          doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("normalizers integrate the density to one") {
    // Uniform laws: exp(log_normalizer) is the reciprocal volume.
    const int n = 3;
    const double cube_vol = std::pow(2.0 * std::sqrt(3.0), n);
    CHECK(std::exp(*Family::uniform_cube(n).log_normalizer()) == doctest::Approx(1.0 / cube_vol));
    const double r = std::sqrt(n + 2.0);
    const double ball_vol = std::pow(std::numbers::pi, 1.5) / std::tgamma(2.5) * r * r * r;
    CHECK(std::exp(*Family::uniform_ball(n).log_normalizer()) == doctest::Approx(1.0 / ball_vol));
    // Laplace with b = 1/sqrt 2: 1/(2b) per coordinate.
    CHECK(std::exp(*Family::product_laplace(n).log_normalizer()) ==
          doctest::Approx(std::pow(1.0 / std::sqrt(2.0), n)));
  }

  TEST_CASE("exact moments") {
    auto g = Family::gaussian(5).exact_moments();
    REQUIRE(g);
    CHECK(g->mean.isZero());
    CHECK(g->covariance.isIdentity());
    auto b = Family::uniform_ball(3).exact_moments();
    REQUIRE(b);
    CHECK(b->covariance.isIdentity(1e-14));
    CHECK(Family::uniform_ball(3).support_radius() == doctest::Approx(std::sqrt(5.0)));

    Matrix M(2, 2);
    M << 2.0, 0.5, 0.0, 1.0;
    Vector v(2);
    v << 1.0, -3.0;
    const auto t = Family::affine(Family::gaussian(2), M, v);
    auto tm = t.exact_moments();
    REQUIRE(tm);
    CHECK((tm->mean - v).norm() < 1e-15);
    CHECK((tm->covariance - M * M.transpose()).norm() < 1e-14);
    CHECK(t.kind() == FamilyKind::transformed);
    CHECK(t.supports(Backend::closed_form));
  }

  TEST_CASE("every zoo family is centered and isotropic") {
    const int n = 4;
    const std::size_t N = 100000;
    Rng dir_rng(11);
    for (const auto& f : zoo(n)) {
      CAPTURE(f.name());
      const Matrix x = sample(f, N, 5);
      for (int i = 0; i < n; ++i) CHECK(std::abs(x.row(i).mean()) <= 4.0 / std::sqrt(double(N)));
      for (int d = 0; d < 4; ++d) {
        Vector u(n);
        for (int i = 0; i < n; ++i) u[i] = dir_rng.normal();
        u.normalize();
        const double m2 = (u.transpose() * x).array().square().mean();
        CHECK(m2 == doctest::Approx(1.0).epsilon(0.05));
      }
      auto em = empirical_moments(x);
      CHECK((em.covariance - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 0.05);
      if (f.bounded()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK_UNARY(x.col(j).norm() <= f.support_radius() + 1e-12);
      }
    }
  }

  TEST_CASE("midpoint log-concavity on sampled pairs") {
    const int n = 3;
    for (const auto& f : zoo(n)) {
      CAPTURE(f.name());
      const Matrix x = sample(f, 2000, 9);
      int failures = 0;
      for (int k = 0; k < 1000; ++k) {
        const Vector a = x.col(2 * k);
        const Vector b = x.col(2 * k + 1);
        const double mid = f.log_density((a + b) / 2.0);
        if (mid < 0.5 * (f.log_density(a) + f.log_density(b)) - 1e-9) ++failures;
      }
      CHECK(failures == 0);
    }
  }

  TEST_CASE("samples lie in the declared support and densities are finite there") {
    for (const auto& f : zoo(2)) {
      const Matrix x = sample(f, 500, 3);
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        CHECK_UNARY(std::isfinite(f.log_density(x.col(j))));
      }
    }
  }

  TEST_CASE("backend legality") {
    CHECK(Family::gaussian(2).supports(Backend::closed_form));
    CHECK(Family::uniform_cube(2).supports(Backend::quadrature));
    CHECK_FALSE(Family::uniform_cube(2).supports(Backend::closed_form));
    CHECK(Family::product_laplace(2).supports(Backend::quadrature));
    CHECK_FALSE(Family::uniform_ball(2).supports(Backend::quadrature));
    CHECK(Family::uniform_simplex(2).supports(Backend::sampling));
    const auto s = Family::symmetrized(Family::uniform_cube(2));
    CHECK(s.supports(Backend::sampling));
    CHECK_FALSE(s.supports(Backend::quadrature));
    CHECK_FALSE(s.has_density());
    CHECK_THROWS_AS(s.log_density(Vector::Zero(2)), Error);
    CHECK(parse_backend("quadrature") == Backend::quadrature);
    CHECK_THROWS_AS(parse_backend("magic"), Error);
  }

  TEST_CASE("rejection sampler aborts with the observed rate") {
    const auto tiny = Family::restricted(Family::gaussian(1), 1e-6);
    try {
      (void)sample(tiny, 10, 1);
      FAIL("expected SamplingError");
    } catch (const SamplingError& e) {
      CHECK(e.acceptance_rate() < RejectionMonitor::min_rate);
      CHECK(e.module() == "measures");
    }
  }

  TEST_CASE("name resolution") {
    CHECK(Family::from_name("cube", 3).kind() == FamilyKind::uniform_cube);
    CHECK(Family::from_name("product_laplace", 3).kind() == FamilyKind::product_laplace);
    CHECK(Family::from_name("simplex", 3).dimension() == 3);
    CHECK_THROWS_AS(Family::from_name("banana", 3), Error);
    CHECK_THROWS_AS(Family::gaussian(0), Error);
  }
}
