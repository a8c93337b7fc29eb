#include <doctest.h>

#include "locball/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

using namespace locball;

TEST_SUITE("quadrature") {
  TEST_CASE("15-point rule integrates polynomials up to degree 29 exactly") {
    const auto& rule = gauss_legendre_15();
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int k = 0; k <= 29; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < rule.size; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }

  TEST_CASE("adaptive integration of a Gaussian and its moments") {
    auto f = [](double x) {
      const double w = std::exp(-0.5 * x * x);
      return std::array<double, 3>{w, x * w, x * x * w};
    };
    const auto r = integrate_adaptive<3>(f, -12.0, 12.0, 1e-12);
    CHECK(r.converged);
    const double root = std::sqrt(2.0 * std::numbers::pi);
    CHECK(r.values[0] == doctest::Approx(root).epsilon(1e-12));
    CHECK(std::abs(r.values[1]) < 1e-12);
    CHECK(r.values[2] == doctest::Approx(root).epsilon(1e-12));
  }

  TEST_CASE("piecewise integration across a kink") {
    auto f = [](double x) { return std::array<double, 1>{std::exp(-std::abs(x))}; };
    const std::array<double, 3> pts{-40.0, 0.0, 40.0};
    const auto r = integrate_piecewise<1>(f, pts, 1e-10);
    CHECK(r.converged);
    CHECK(r.values[0] == doctest::Approx(2.0 * (1.0 - std::exp(-40.0))).epsilon(1e-12));
  }

  TEST_CASE("empty interval and depth exhaustion") {
    auto f = [](double) { return std::array<double, 1>{1.0}; };
    CHECK(integrate_adaptive<1>(f, 1.0, 1.0, 1e-10).values[0] == 0.0);
    auto rough = [](double x) { return std::array<double, 1>{x > 0.3 ? 1.0 : 0.0}; };
    const auto r = integrate_adaptive<1>(rough, 0.0, 1.0, 1e-300, 3);
    CHECK_FALSE(r.converged);
  }
}
