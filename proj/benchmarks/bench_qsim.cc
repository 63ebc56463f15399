#include <benchmark/benchmark.h>

#include <renege_ldp/el_minimizer.hpp>
#include <renege_ldp/model.hpp>
#include <renege_ldp/qsim.hpp>

using namespace renege_ldp;

namespace {

qsim::SimConfig base_config(std::int64_t n) {
  qsim::SimConfig cfg;
  cfg.params.lambda = 2.0;
  cfg.params.mu = 1.0;
  cfg.params.theta = 1.0;
  cfg.params.x0 = 1.0;
  cfg.horizon.T = 5.0;
  cfg.n = n;
  cfg.seed = 12345;
  return cfg;
}

void BM_Simulate(benchmark::State& state) {
  auto cfg = base_config(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    auto path = qsim::simulate(cfg);
    benchmark::DoNotOptimize(path.x_bar_T);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10)->Arg(100)->Arg(1000)->Complexity(benchmark::oN);

void BM_EstimateIS(benchmark::State& state) {
  auto cfg = base_config(10);
  cfg.replications = state.range(0);
  auto tilt = el::solve_tilt(cfg.params, cfg.horizon, TargetRate{2.0});
  auto controls = el::build_minimizer(cfg.params, cfg.horizon, tilt, 200);
  for (auto _ : state) {
    auto report = qsim::estimate_is(cfg, TargetRate{2.0}, qsim::Direction::AtLeast, controls);
    benchmark::DoNotOptimize(report.p_hat);
  }
}
BENCHMARK(BM_EstimateIS)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_EstimateNaive(benchmark::State& state) {
  auto cfg = base_config(10);
  cfg.replications = state.range(0);
  for (auto _ : state) {
    auto report = qsim::estimate_naive(cfg, TargetRate{2.0}, qsim::Direction::AtLeast);
    benchmark::DoNotOptimize(report.hits);
  }
}
BENCHMARK(BM_EstimateNaive)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
