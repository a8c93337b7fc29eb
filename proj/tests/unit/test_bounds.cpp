#include <doctest.h>

#include "locball/analysis/bounds.hpp"
#include "locball/rng.hpp"
#include "locball/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

using namespace locball;
using namespace locball::analysis;

namespace {

BoundSpec spec_of(std::vector<double> spectrum, double eps, double b = 1.0) {
  BoundSpec s;
  s.spectrum = std::move(spectrum);
  s.epsilon = eps;
  s.b = b;
  return s;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("Paouris bound examples") {
    CHECK(close(paouris_bound(spec_of(std::vector<double>(10, 1.0), 0.1)), 1e-10));
    CHECK(close(paouris_bound(spec_of({4.0, 1.0}, 0.5)), std::pow(0.5, 1.25)));
    CHECK(paouris_bound(spec_of({4.0, 1.0}, 0.5)) == doctest::Approx(0.4204).epsilon(1e-4));
    const double weak = paouris_bound(spec_of({4.0, 1.0}, 0.5, 2.0));
    CHECK(close(weak, std::pow(0.5, 1.25 / 4.0)));
    CHECK(weak == doctest::Approx(0.8052).epsilon(1e-4));
    CHECK(weak > paouris_bound(spec_of({4.0, 1.0}, 0.5)));
  }

  TEST_CASE("subspace selection examples") {
    const std::vector<double> a{1, 1, 1, 1}, b{10, 1}, c{2, 2, 1};
    CHECK(select_subspace(a) == 2);
    CHECK(select_subspace(b) == 1);
    CHECK(select_subspace(c) == 1);
    CHECK(c[0] >= 5.0 / 6.0);
  }

  TEST_CASE("subspace selection property on random spectra") {
    Rng rng(1);
    for (int trial = 0; trial < 10000; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform() * 40);
      std::vector<double> s(n);
      for (auto& v : s) v = std::exp(4.0 * (rng.uniform() - 0.5));
      std::sort(s.begin(), s.end(), std::greater<>());
      const int k = select_subspace(s);
      const double tr = std::accumulate(s.begin(), s.end(), 0.0);
      REQUIRE(k >= 1);
      REQUIRE(k <= n);
      REQUIRE(s[k - 1] >= tr / (2.0 * n));
    }
  }

  TEST_CASE("projected bound examples") {
    for (int n : {2, 8, 16}) {
      CHECK(close(projected_paouris_bound(spec_of(std::vector<double>(n, 1.0), 0.1)), std::pow(0.4, n / 8.0)));
    }
    const double v = projected_paouris_bound(spec_of({4, 1, 1, 1, 1}, 0.01));
    CHECK(close(v, std::pow(0.1, 0.16)));
    CHECK(v == doctest::Approx(0.6918).epsilon(1e-4));
    const double v2 = projected_paouris_bound(spec_of({4, 1, 1, 1, 1}, 0.01, 2.0));
    CHECK(close(std::log(v2) / std::log(v), 0.25));
  }

  TEST_CASE("projected bound is nonincreasing in epsilon below the threshold") {
    const std::vector<double> s{3.0, 2.0, 1.0, 0.5};
    const double tr = 6.5;
    const double top = tr / (4.0 * 4 * 3.0);
    double prev = 0.0;
    for (int i = 1; i < 200; ++i) {
      const double eps = top * i / 200.0;
      const double v = projected_paouris_bound(spec_of(s, eps));
      CHECK(v >= prev);
      prev = v;
    }
  }

  TEST_CASE("Lee-Vempala bound examples") {
    CHECK(close(lee_vempala_bound(8, 0.1, 1.0, 1.0), std::pow(0.1, 8.0 / std::log(8.0))));
    CHECK(8.0 / std::log(8.0) == doctest::Approx(3.847).epsilon(1e-3));
    const double psi = psi_sq_log_bound(16, 1.0);
    CHECK(close(psi, std::log(16.0)));
    CHECK(close(lee_vempala_bound(16, 0.1, 1.0, psi), std::pow(0.1, 16.0 / (std::log(16.0) * std::log(16.0)))));
    CHECK(16.0 / std::pow(std::log(16.0), 2) == doctest::Approx(2.081).epsilon(1e-3));
    CHECK(lee_vempala_bound(32, 1.0 - 1e-12, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(lee_vempala_bound(1, 0.1, 1.0, 1.0), Error);
  }

  TEST_CASE("validation and warnings") {
    CHECK_THROWS_AS(paouris_bound(spec_of({}, 0.1)), Error);
    CHECK_THROWS_AS(paouris_bound(spec_of({1.0, 2.0}, 0.1)), Error);
    CHECK_THROWS_AS(paouris_bound(spec_of({1.0, 0.0}, 0.1)), Error);
    CHECK_THROWS_AS(paouris_bound(spec_of({1.0}, 1.0)), Error);
    CHECK_THROWS_AS(paouris_bound(spec_of({1.0}, 0.1, 0.0)), Error);
    CHECK(bound_warnings(spec_of({1.0, 1.0}, 0.1)).empty());
    CHECK_FALSE(bound_warnings(spec_of({1.0, 1.0}, 0.6)).empty());
  }
}
