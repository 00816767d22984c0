#include <benchmark/benchmark.h>

#include "relhop/dynamics.hpp"
#include "relhop/interpolation.hpp"
#include "relhop/meanfield.hpp"

using namespace relhop;

namespace {

ModelKind kind_of(std::int64_t code) { return code == 0 ? ModelKind::classical() : ModelKind::relativistic(); }

// One random-scan sweep at N sites, P = 3, beta = 2.
void BM_Sweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto kind = kind_of(state.range(1));
  const auto ps = sample_patterns(3, n, 1);
  auto s = SpinState::aligned(ps, 0);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sweep(s, ps, kind, 2.0, UpdateRule::Glauber, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Sweep)->ArgsProduct({{400, 2000}, {0, 1}});

void BM_ExactLogPartition(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ps = sample_patterns(2, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(exact_log_partition(ModelKind::relativistic(), ps, 1.0));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_ExactLogPartition)->DenseRange(12, 20, 4);

void BM_InterpolatingAlpha(benchmark::State& state) {
  const auto ps = sample_patterns(2, 12, 4);
  const SplitSpec split(12, 5);
  for (auto _ : state) benchmark::DoNotOptimize(interpolating_alpha(ps, split, 0.5));
}
BENCHMARK(BM_InterpolatingAlpha);

void BM_FixedPoint(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const SelfConsistencyProblem problem(ModelKind::relativistic(), p, 2.0);
  std::vector<double> start(p, 0.0);
  start[0] = 0.9;
  const OverlapVector m0(start);
  for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_point(problem, m0));
}
BENCHMARK(BM_FixedPoint)->Arg(1)->Arg(3)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
