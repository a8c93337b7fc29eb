#include <doctest.h>

#include "locball/parallel.hpp"
#include "locball/rng.hpp"

#include <atomic>
#include <cmath>
#include <set>
#include <vector>

using namespace locball;

TEST_SUITE("rng") {
  TEST_CASE("same seed gives the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
  }

  TEST_CASE("derived seeds differ by path and are stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, {i}));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    CHECK(derive_seed(7, {3}) != derive_seed(8, {3}));
  }

  TEST_CASE("uniform and normal moments") {
    Rng rng(1);
    const int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK_UNARY(u >= 0.0);
      CHECK_UNARY(u < 1.0);
      su += u;
      su2 += u * u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
      sn4 += z * z * z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(su2 / n - std::pow(su / n, 2) == doctest::Approx(1.0 / 12).epsilon(0.02));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sn4 / n == doctest::Approx(3.0).epsilon(0.05));
  }

  TEST_CASE("exponential has unit mean and open uniform avoids zero") {
    Rng rng(3);
    double s = 0;
    for (int i = 0; i < 100000; ++i) {
      const double e = rng.exponential();
      CHECK_UNARY(e > 0.0);
      s += e;
      const double u = rng.uniform_open();
      CHECK_UNARY(u > 0.0);
      CHECK_UNARY(u < 1.0);
    }
    CHECK(s / 100000 == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> visits(1000);
    parallel_for(visits.size(), [&](std::size_t i) { visits[i]++; });
    for (auto& v : visits) CHECK(v.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 5) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    CHECK(worker_count() >= 1);
  }
}
