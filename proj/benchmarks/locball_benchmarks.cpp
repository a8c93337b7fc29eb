#include "locball/analysis/estimators.hpp"
#include "locball/localization.hpp"
#include "locball/measures.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace locball;

void BM_SampleCube(benchmark::State& state) {
  const auto family = Family::uniform_cube(static_cast<int>(state.range(0)));
  Seed seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_chunk(family, seed++, 0, sample_chunk_size));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sample_chunk_size));
}
BENCHMARK(BM_SampleCube)->Arg(4)->Arg(16)->Arg(64);

void BM_SampleSimplex(benchmark::State& state) {
  const auto family = Family::uniform_simplex(static_cast<int>(state.range(0)));
  Seed seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_chunk(family, seed++, 0, sample_chunk_size));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sample_chunk_size));
}
BENCHMARK(BM_SampleSimplex)->Arg(4)->Arg(16);

void BM_QuadratureMoments(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto family = Family::product_laplace(n);
  const TiltState s{0.5, Vector::LinSpaced(n, -1.0, 1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(tilted_moments(family, s, Backend::quadrature));
}
BENCHMARK(BM_QuadratureMoments)->Arg(4)->Arg(16);

void BM_ImportanceMoments(benchmark::State& state) {
  const int n = 8;
  const auto pool = make_pool(Family::uniform_ball(n), static_cast<std::size_t>(state.range(0)), 3);
  const TiltState s{0.5, Vector::Constant(n, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(tilted_moments(pool, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ImportanceMoments)->Arg(20'000)->Arg(100'000);

void BM_SmallBall(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto family = Family::gaussian(n);
  Seed seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analysis::small_ball_estimate(family, Vector::Zero(n), std::sqrt(0.1 * n), 100'000, seed++));
  }
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_SmallBall)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
