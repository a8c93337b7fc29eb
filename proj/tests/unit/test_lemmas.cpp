#include <doctest.h>

#include "locball/analysis/lemmas.hpp"

#include <cmath>
#include <vector>

using namespace locball;
using namespace locball::analysis;

namespace {

LocalizationPath synthetic_path(std::vector<double> times, std::vector<double> top_eigenvalue) {
  LocalizationPath p;
  p.times = std::move(times);
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    p.states.push_back({p.times[i], Vector::Zero(2)});
    TiltedMoments m;
    m.barycenter = Vector::Zero(2);
    m.covariance = Matrix::Identity(2, 2) * 0.1;
    m.covariance(0, 0) = top_eigenvalue[i];
    p.moments.push_back(m);
  }
  return p;
}

}  // namespace

TEST_SUITE("lemmas") {
  TEST_CASE("covariance bound counts violations and skips t = 0") {
    std::vector<LocalizationPath> paths;
    paths.push_back(synthetic_path({0.0, 0.5, 1.0}, {50.0, 1.9, 0.9}));
    paths.push_back(synthetic_path({0.0, 0.25, 1.0}, {1.0, 4.05, 1.2}));
    const auto r = covariance_bound_check(paths, 0.1);
    CHECK(r.states_checked == 4);
    CHECK(r.violations == 1);
    CHECK(r.worst_excess == doctest::Approx(0.2));
    CHECK(r.worst_time == doctest::Approx(1.0));
    CHECK_FALSE(r.passed());
    CHECK(covariance_bound_check(paths, 0.25).passed());
  }

  TEST_CASE("martingale check on a Gaussian") {
    MartingaleOptions o;
    o.dt = 1e-2;
    o.paths = 128;
    o.backend = Backend::closed_form;
    o.region_budget = 5000;
    o.reference_samples = 200000;
    const auto r = martingale_check(Family::gaussian(2), o, 3);
    CHECK(r.entries.size() == 9);
    CHECK(r.passed);
    for (const auto& e : r.entries) {
      CAPTURE(e.function);
      CAPTURE(e.time);
      CHECK(std::abs(e.z) <= 4.0);
      CHECK(e.ensemble_stderr > 0.0);
    }
  }

  TEST_CASE("martingale path options record every requested time") {
    MartingaleOptions o;
    o.times = {0.25, 0.5, 1.0};
    o.dt = 1e-3;
    o.record_every = 30;
    const auto po = martingale_path_options(o);
    CHECK(po.horizon == 1.0);
    CHECK(250 % po.record_every == 0);
    o.times.clear();
    CHECK_THROWS_AS(martingale_path_options(o), Error);
  }

  TEST_CASE("shrinkage with the whole space is trivial") {
    ShrinkageOptions o;
    o.paths = 16;
    o.dt = 1e-2;
    o.backend = Backend::quadrature;
    const auto r = shrinkage_check(Family::uniform_cube(2), Region::whole_space(), o, 1);
    CHECK(r.g0 == 1.0);
    CHECK(r.mean_log_inverse_gT == 0.0);
    CHECK(r.event_frequency == 1.0);
    CHECK(r.passed());
    CHECK(r.diameter == doctest::Approx(2.0 * std::sqrt(6.0)));
  }

  TEST_CASE("shrinkage errors") {
    ShrinkageOptions o;
    o.paths = 4;
    o.base_samples = 1000;
    CHECK_THROWS_AS(shrinkage_check(Family::gaussian(2), Region::whole_space(), o, 1), Error);
    CHECK_THROWS_AS(shrinkage_check(Family::uniform_cube(2), Region::centered_ball(2, 0.0), o, 1), Error);
    o.lambda = 1.0;
    CHECK_THROWS_AS(shrinkage_check(Family::uniform_cube(2), Region::whole_space(), o, 1), Error);
  }

  TEST_CASE("shrinkage on a conditioned cube") {
    ShrinkageOptions o;
    o.paths = 64;
    o.dt = 1e-2;
    o.budget = 20000;
    o.region_budget = 20000;
    o.base_samples = 200000;
    const auto f = Family::restricted(Family::uniform_cube(2), 2.0);
    const auto r = shrinkage_check(f, Region::centered_ball(2, std::sqrt(2.0)), o, 2);
    CHECK(r.failed_paths == 0);
    CHECK(r.integrated_passed);
    CHECK(r.event_passed);
    CHECK(r.gT.size() == 64);
  }

  TEST_CASE("trace check on a Gaussian is exact") {
    for (double ts : {0.25, 0.5, 1.0}) {
      const auto r = guan_trace_check(Family::gaussian(3), ts, 1e-2, 8, Backend::closed_form, 0, 1);
      CHECK(r.mean_trace == doctest::Approx(3.0 / (1.0 + ts)).epsilon(1e-12));
      CHECK(r.std_error < 1e-12);
    }
    CHECK_THROWS_AS(guan_trace_check(Family::gaussian(3), 0.0, 1e-2, 8, Backend::closed_form, 0, 1), Error);
  }

  TEST_CASE("trace check on a cube") {
    const auto r = guan_trace_check(Family::uniform_cube(4), 0.5, 5e-3, 64, Backend::quadrature, 0, 2);
    CHECK(trace_lower_bound_holds(r, 0.25));
    CHECK(r.mean_trace <= 4.0 / 0.5);
  }

  TEST_CASE("trace check counts paths stopped by the ESS gate") {
    const auto r = guan_trace_check(Family::uniform_cube(8), 4.0, 0.1, 4, Backend::sampling, 500, 4);
    CHECK(r.failed_paths > 0);
    CHECK_FALSE(r.first_failure.empty());
    CHECK_FALSE(trace_lower_bound_holds(r, 0.0));
  }

  TEST_CASE("trace decreases in time on a Laplace law") {
    const auto a = guan_trace_check(Family::product_laplace(8), 0.25, 1e-2, 64, Backend::quadrature, 0, 3);
    const auto b = guan_trace_check(Family::product_laplace(8), 0.5, 1e-2, 64, Backend::quadrature, 0, 3);
    CHECK(a.mean_trace >= b.mean_trace - 3.0 * std::hypot(a.std_error, b.std_error));
  }

  TEST_CASE("certificate with a zero-hit base mass reports the zero-hit bound") {
    CertificateOptions o;
    o.epsilon = 1e-4;
    o.paths = 16;
    o.base_samples = 10000;
    o.budget = 5000;
    o.region_budget = 5000;
    const auto r = assemble_certificate(Family::uniform_cube(4), o, 4);
    CHECK(r.base_mass.hits == 0);
    CHECK(r.base_mass_upper == doctest::Approx(1.0 - std::pow(0.05, 1e-4)).epsilon(1e-12));
    CHECK(r.paths == 16);
    CHECK(r.path_details.size() == 16);
    CHECK(r.p_e0_target == doctest::Approx(0.125));
    CHECK(r.p_e1_target == doctest::Approx(0.75));
  }

  TEST_CASE("certificate input errors") {
    CertificateOptions o;
    CHECK_THROWS_AS(assemble_certificate(Family::gaussian(2), o, 1), Error);
    o.c1 = 1.5;
    CHECK_THROWS_AS(assemble_certificate(Family::uniform_cube(2), o, 1), Error);
    o.c1 = 0.5;
    o.lambda = 0.5;
    CHECK_THROWS_AS(assemble_certificate(Family::uniform_cube(2), o, 1), Error);
  }
}
