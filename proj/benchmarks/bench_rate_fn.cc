#include <benchmark/benchmark.h>

#include <renege_ldp/el_minimizer.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/rate_fn.hpp>

#include <random>
#include <vector>

using namespace renege_ldp;

namespace {

ModelParams canonical() {
  ModelParams p;
  p.lambda = 2.0;
  p.mu = 1.0;
  p.theta = 1.0;
  p.x0 = 1.0;
  return p;
}

void BM_LocalCost(benchmark::State& state) {
  auto p = canonical();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.1, 4.0), up(-2.0, 2.0), uq(0.0, 2.0);
  std::vector<double> xs(1024), ps(1024), qs(1024);
  for (int k = 0; k < 1024; ++k) {
    xs[k] = ux(rng);
    ps[k] = up(rng);
    qs[k] = uq(rng);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate_fn::local_cost(p, xs[i], ps[i], qs[i]));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_LocalCost);

void BM_DecayRate(benchmark::State& state) {
  auto p = canonical();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate_fn::decay_rate(p, TargetRate{2.0}));
  }
}
BENCHMARK(BM_DecayRate);

void BM_PathCost(benchmark::State& state) {
  auto p = canonical();
  Horizon h{10.0};
  TargetRate g{2.0};
  auto tilt = el::solve_tilt(p, h, g);
  auto traj = el::build_minimizer(p, h, tilt, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate_fn::path_cost(p, traj));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PathCost)->Arg(200)->Arg(2000)->Arg(20000)->Complexity(benchmark::oN);

void BM_SolveTilt(benchmark::State& state) {
  auto p = canonical();
  for (auto _ : state) {
    benchmark::DoNotOptimize(el::solve_tilt(p, Horizon{10.0}, TargetRate{2.0}));
  }
}
BENCHMARK(BM_SolveTilt);

}  // namespace

BENCHMARK_MAIN();
