#include <doctest.h>

#include "locball/analysis/estimators.hpp"
#include "locball/analysis/fit.hpp"

#include <cmath>
#include <vector>

using namespace locball;
using namespace locball::analysis;

TEST_SUITE("fit") {
  TEST_CASE("planted exponent is recovered exactly") {
    std::vector<FitRow> rows;
    for (int n : {2, 4, 8}) {
      for (double e : {0.1, 0.2}) rows.push_back({n, e, std::pow(e, 0.1 * n)});
    }
    const auto f = exponent_fit(rows);
    CHECK(f.fitted_c == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(f.residual < 1e-12);
    REQUIRE(f.per_n.size() == 3);
    for (const auto& s : f.per_n) CHECK(s.c == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("one-row fit") {
    const std::vector<FitRow> rows{{5, 0.3, 0.01}};
    const auto f = exponent_fit(rows);
    CHECK(f.fitted_c == doctest::Approx(std::log(0.01) / (5 * std::log(0.3))).epsilon(1e-14));
    CHECK(f.residual < 1e-14);
  }

  TEST_CASE("Gaussian oracle table") {
    std::vector<FitRow> rows;
    for (int n : {2, 4, 8, 16}) {
      for (double e : {0.05, 0.1, 0.2}) rows.push_back({n, e, gaussian_small_ball_oracle(n, e).exact});
    }
    const auto f = exponent_fit(rows);
    CHECK(f.fitted_c >= 0.3);
    CHECK(f.fitted_c <= 1.2);
    CHECK(f.residual >= 0.0);
  }

  TEST_CASE("invalid tables") {
    CHECK_THROWS_AS(exponent_fit(std::vector<FitRow>{}), Error);
    CHECK_THROWS_AS(exponent_fit(std::vector<FitRow>{{2, 0.1, 0.0}}), Error);
    CHECK_THROWS_AS(exponent_fit(std::vector<FitRow>{{2, 1.5, 0.1}}), Error);
  }
}
