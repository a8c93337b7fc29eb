#include <doctest.h>

#include "locball/analysis/diagnostics.hpp"
#include "locball/localization.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace locball;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double lambda_max(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// Tilted moments of a unit-variance Laplace coordinate by brute-force
// trapezoid sums on a fine grid.
std::pair<double, double> laplace_tilt_oracle(double t, double theta) {
  const double b = 1.0 / std::sqrt(2.0);
  const double h = 1e-4;
  double z = 0, m1 = 0, m2 = 0;
  for (double x = -40.0; x <= 40.0; x += h) {
    const double w = std::exp(-t * x * x / 2 + theta * x - std::abs(x) / b);
    z += w;
    m1 += x * w;
    m2 += x * x * w;
  }
  const double mean = m1 / z;
  return {mean, m2 / z - mean * mean};
}

}  // namespace

TEST_SUITE("localization") {
  TEST_CASE("Gaussian closed form at (1, (1,0))") {
    TiltState s{1.0, Vector::Zero(2)};
    s.theta[0] = 1.0;
    const auto m = tilted_moments(Family::gaussian(2), s, Backend::closed_form);
    CHECK(m.barycenter[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.barycenter[1] == 0.0);
    CHECK((m.covariance - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-15);
  }

  TEST_CASE("identity tilt returns the base moments for every backend") {
    const auto cube = Family::uniform_cube(2);
    const auto s = TiltState::origin(2);
    const auto q = tilted_moments(cube, s, Backend::quadrature);
    CHECK(q.barycenter.norm() < 1e-10);
    CHECK((q.covariance - Matrix::Identity(2, 2)).norm() < 1e-9);
    const auto is = tilted_moments(cube, s, Backend::sampling, 200000, 1);
    CHECK(is.ess == doctest::Approx(200000.0));
    CHECK(is.barycenter.norm() < 0.02);
    CHECK((is.covariance - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.03);
    const auto g = tilted_moments(Family::gaussian(3), TiltState::origin(3), Backend::closed_form);
    CHECK(g.covariance.isIdentity());
  }

  TEST_CASE("Laplace quadrature matches an independent grid oracle and importance sampling") {
    const auto lap = Family::product_laplace(1);
    TiltState s{0.5, Vector::Constant(1, 0.3)};
    const auto q = tilted_moments(lap, s, Backend::quadrature);
    const auto [mean, var] = laplace_tilt_oracle(0.5, 0.3);
    CHECK(q.barycenter[0] == doctest::Approx(mean).epsilon(1e-6));
    CHECK(q.covariance(0, 0) == doctest::Approx(var).epsilon(1e-6));
    CHECK(q.quadrature_error < 1e-8);

    const auto is = tilted_moments(lap, s, Backend::sampling, 1000000, 2);
    CHECK(std::abs(is.barycenter[0] - q.barycenter[0]) <= 3.0 * is.barycenter_stderr[0]);
    CHECK(is.covariance(0, 0) == doctest::Approx(q.covariance(0, 0)).epsilon(0.01));
  }

  TEST_CASE("illegal backends are rejected") {
    CHECK_THROWS_AS(tilted_moments(Family::uniform_ball(2), TiltState::origin(2), Backend::quadrature), Error);
    CHECK_THROWS_AS(tilted_moments(Family::uniform_cube(2), TiltState::origin(2), Backend::closed_form), Error);
    CHECK_THROWS_AS(tilted_moments(Family::uniform_cube(2), TiltState::origin(2), Backend::sampling, 0, 1), Error);
  }

  TEST_CASE("ESS gate fires on a far tilt") {
    TiltState far{0.0, Vector::Constant(2, 40.0)};
    try {
      (void)tilted_moments(Family::gaussian(2), far, Backend::sampling, 10000, 3);
      FAIL("expected EssError");
    } catch (const EssError& e) {
      CHECK(e.ess() < 100.0);
    }
  }

  TEST_CASE("importance weights are normalized and overflow-safe") {
    const auto pool = make_pool(Family::uniform_cube(2), 1000, 4);
    TiltState s{0.0, Vector::Constant(2, 500.0)};
    const Vector w = importance_weights(pool, s);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w.allFinite());
    CHECK(effective_sample_size(Vector::Constant(4, 0.25)) == doctest::Approx(4.0));
  }

  TEST_CASE("step examples") {
    const auto g = Family::gaussian(2);
    const auto s1 = step(g, TiltState::origin(2), 0.1, Vector::Zero(2), Backend::closed_form);
    CHECK(s1.t == doctest::Approx(0.1));
    CHECK(s1.theta.isZero());

    TiltState s{1.0, Vector::Zero(2)};
    s.theta[0] = 1.0;
    Vector noise(2);
    noise << 0.1, -0.1;
    const auto s2 = step(g, s, 0.2, noise, Backend::closed_form);
    CHECK(s2.t == doctest::Approx(1.2));
    CHECK(s2.theta[0] == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(s2.theta[1] == doctest::Approx(-0.1).epsilon(1e-15));

    const auto lap = Family::product_laplace(1);
    TiltState sl{0.5, Vector::Constant(1, 0.3)};
    const double a = tilted_moments(lap, sl, Backend::quadrature).barycenter[0];
    const auto s3 = step(lap, sl, 1e-3, Vector::Zero(1), Backend::quadrature);
    CHECK(s3.theta[0] == doctest::Approx(0.3 + a * 1e-3).epsilon(1e-15));
  }

  TEST_CASE("Gaussian paths follow the closed form and are reproducible") {
    PathOptions o;
    o.horizon = 1.0;
    o.dt = 1e-3;
    o.record_every = 50;
    const auto g = Family::gaussian(3);
    const auto p = run_path(g, o, 5, 0);
    REQUIRE(p.times.size() == p.states.size());
    REQUIRE(p.times.size() == p.moments.size());
    CHECK(p.times.front() == 0.0);
    CHECK(p.states.front().theta.isZero());
    CHECK(p.times.back() == doctest::Approx(1.0));
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      const double t = p.times[i];
      CHECK((p.moments[i].covariance - Matrix::Identity(3, 3) / (1 + t)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((p.moments[i].barycenter - p.states[i].theta / (1 + t)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto q = run_path(g, o, 5, 0);
    CHECK((q.states.back().theta.array() == p.states.back().theta.array()).all());
    const auto other = run_path(g, o, 5, 1);
    CHECK_FALSE((other.states.back().theta.array() == p.states.back().theta.array()).all());
  }

  TEST_CASE("halving dt on a coupled Brownian path barely moves theta") {
    const auto g = Family::gaussian(3);
    const int fine_steps = 2000;
    const double h = 1.0 / fine_steps;
    Rng rng(6);
    std::vector<Vector> dB(fine_steps);
    for (auto& v : dB) {
      v.resize(3);
      for (int i = 0; i < 3; ++i) v[i] = std::sqrt(h) * rng.normal();
    }
    TiltState fine = TiltState::origin(3);
    TiltState coarse = TiltState::origin(3);
    for (int k = 0; k < fine_steps; ++k) fine = step(g, fine, h, dB[k], Backend::closed_form);
    for (int k = 0; k < fine_steps / 2; ++k) {
      coarse = step(g, coarse, 2 * h, dB[2 * k] + dB[2 * k + 1], Backend::closed_form);
    }
    CHECK((fine.theta - coarse.theta).norm() < 1e-2);
  }

  TEST_CASE("ensembles equal independently run paths") {
    PathOptions o;
    o.horizon = 0.2;
    o.dt = 1e-2;
    o.backend = Backend::quadrature;
    const auto f = Family::uniform_cube(2);
    const auto e = run_ensemble(f, o, 4, 9);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const auto p = run_path(f, o, 9, i);
      CHECK((p.states.back().theta.array() == e[i].states.back().theta.array()).all());
    }
    CHECK_THROWS_AS(run_path(f, PathOptions{0.1, 0.5}, 1), Error);
  }

  TEST_CASE("covariance bound on sampled cube path") {
    PathOptions o;
    o.horizon = 0.5;
    o.dt = 1e-3;
    o.backend = Backend::sampling;
    o.budget = 100000;
    o.record_every = 20;
    const auto p = run_path(Family::uniform_cube(2), o, 7);
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      if (p.times[i] < 0.1) continue;
      CHECK(lambda_max(p.moments[i].covariance) <= 1.0 / p.times[i] + 0.1);
    }
  }

  TEST_CASE("covariance bound on quadrature Laplace path") {
    PathOptions o;
    o.horizon = 1.0;
    o.dt = 1e-3;
    o.backend = Backend::quadrature;
    o.record_every = 10;
    const auto p = run_path(Family::product_laplace(3), o, 8);
    for (std::size_t i = 1; i < p.times.size(); ++i) {
      CHECK(lambda_max(p.moments[i].covariance) <= 1.0 / p.times[i] + 0.02);
    }
  }

  TEST_CASE("symmetric families have odd tilted barycenters") {
    for (const auto& f : {Family::uniform_cube(2), Family::product_laplace(2)}) {
      TiltState s{0.7, Vector::Zero(2)};
      CHECK(tilted_moments(f, s, Backend::quadrature).barycenter.norm() < 1e-10);
      s.theta << 0.4, -1.1;
      const Vector a = tilted_moments(f, s, Backend::quadrature).barycenter;
      s.theta = -s.theta;
      const Vector b = tilted_moments(f, s, Backend::quadrature).barycenter;
      CHECK((a + b).norm() < 1e-10);
    }
  }

  TEST_CASE("tilted directional moments respect strong log-concavity") {
    const auto pool = make_pool(Family::uniform_cube(2), 200000, 10);
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    for (double t : {0.5, 1.0}) {
      TiltState s{t, Vector::Zero(2)};
      s.theta << 0.5, -0.3;
      for (double p : {2.0, 4.0, 6.0}) {
        CHECK(analysis::tilted_directional_moment(pool, s, e1, p) <= 1.05 * std::sqrt(p / t));
      }
    }
  }

  TEST_CASE("Brownian increments have variance dt") {
    double s2 = 0;
    const int M = 20000;
    for (int k = 0; k < M; ++k) s2 += brownian_increment(1, 0.01, 3, 0, k).squaredNorm();
    CHECK(s2 / M == doctest::Approx(0.01).epsilon(0.05));
    CHECK((brownian_increment(2, 0.1, 1, 2, 3).array() == brownian_increment(2, 0.1, 1, 2, 3).array()).all());
  }

  TEST_CASE("measure under tilt examples") {
    const auto g1 = Family::gaussian(1);
    const auto whole = measure_under_tilt(g1, TiltState::origin(1), Region::whole_space(), 1000, 1);
    CHECK(whole.value == 1.0);

    const auto ball = measure_under_tilt(g1, TiltState{1.0, Vector::Zero(1)}, Region::centered_ball(1, 1.0), 200000, 2);
    const double exact_ball = 2.0 * phi(std::sqrt(2.0)) - 1.0;
    CHECK(exact_ball == doctest::Approx(0.8427).epsilon(1e-4));
    CHECK(std::abs(ball.value - exact_ball) <= 3.0 * ball.std_error);

    const auto half = measure_under_tilt(g1, TiltState{0.0, Vector::Constant(1, 2.0)},
                                         Region::halfspace(Vector::Ones(1), 0.0), 200000, 3);
    CHECK(std::abs(half.value - phi(2.0)) <= 3.0 * half.std_error);

    // quadrature path for an axis-aligned halfspace on a product law
    const auto cube = Family::uniform_cube(2);
    Vector e1 = Vector::Zero(2);
    e1[0] = 1.0;
    const auto q = measure_under_tilt(cube, TiltState::origin(2), Region::halfspace(e1, 1.0), 0, 0,
                                      Backend::quadrature);
    CHECK(q.value == doctest::Approx((std::sqrt(3.0) - 1.0) / (2.0 * std::sqrt(3.0))).epsilon(1e-9));
    CHECK_THROWS_AS(measure_under_tilt(cube, TiltState::origin(2), Region::centered_ball(2, 1.0), 0, 0,
                                       Backend::quadrature),
                    Error);
  }

  TEST_CASE("region membership") {
    const auto b = Region::ball(Vector::Constant(2, 1.0), 0.5);
    CHECK(b.contains(Vector::Constant(2, 1.2)));
    CHECK_FALSE(b.contains(Vector::Zero(2)));
    CHECK_FALSE(b.describe().empty());
    CHECK(Region::whole_space().contains(Vector::Constant(3, 1e9)));
  }

  TEST_CASE("direct draws from tilted product laws") {
    const int count = 200000;
    Vector theta(2);
    theta << 1.0, -2.0;
    const Matrix g = sample_tilted_product(Family::gaussian(2), {1.0, theta}, count, 11);
    const Vector mean = g.rowwise().mean();
    CHECK(std::abs(mean[0] - 0.5) < 5.0 * std::sqrt(0.5 / count));
    CHECK(std::abs(mean[1] + 1.0) < 5.0 * std::sqrt(0.5 / count));
    const double var0 = (g.row(0).array() - mean[0]).square().mean();
    CHECK(var0 == doctest::Approx(0.5).epsilon(0.02));

    const auto cube = Family::uniform_cube(1);
    const Matrix u = sample_tilted_product(cube, TiltState::origin(1), count, 12);
    CHECK(u.maxCoeff() <= std::sqrt(3.0));
    CHECK(u.minCoeff() >= -std::sqrt(3.0));
    CHECK((u.array().square().mean()) == doctest::Approx(1.0).epsilon(0.02));

    const auto laplace = Family::product_laplace(1);
    const Matrix l = sample_tilted_product(laplace, {1.0, Vector::Constant(1, 3.0)}, count, 13);
    const auto fm = tilted_factor_moments(*laplace.coordinate_factor(), 1.0, 3.0);
    const double lm = l.mean();
    CHECK(std::abs(lm - fm.mean) < 5.0 * std::sqrt(fm.variance / count));
    CHECK((l.array() - lm).square().mean() == doctest::Approx(fm.variance).epsilon(0.03));

    CHECK_THROWS_AS(sample_tilted_product(Family::uniform_ball(2), TiltState::origin(2), 10, 1), Error);
  }

  TEST_CASE("ball mass under tilt: direct draws agree with importance sampling") {
    const auto cube = Family::uniform_cube(3);
    Vector theta(3);
    theta << 0.5, -0.3, 0.2;
    const TiltState s{0.5, theta};
    const auto region = Region::centered_ball(3, std::sqrt(3.0));
    const auto direct = measure_under_tilt(cube, s, region, 200000, 21, Backend::quadrature);
    const auto is = measure_under_tilt(cube, s, region, 200000, 22, Backend::sampling);
    CHECK(direct.std_error > 0.0);
    CHECK(std::abs(direct.value - is.value) < 4.0 * std::hypot(direct.std_error, is.std_error));
    CHECK_THROWS_AS(measure_under_tilt(cube, s, region, 0, 1, Backend::quadrature), Error);
  }
}
