#include <benchmark/benchmark.h>

#include "seqpgg/equilibrium.hpp"
#include "seqpgg/sfem.hpp"
#include "seqpgg/simulator.hpp"

namespace {

using namespace seqpgg;

PopulationSpec bench_population(Treatment t, std::uint64_t seed) {
  PopulationSpec spec;
  spec.treatment = t;
  spec.counts = t == Treatment::T3 ? std::array<int, 4>{7, 11, 14, 0}
                                   : std::array<int, 4>{6, 9, 12, 5};
  spec.beta = 0.75;
  spec.seed = seed;
  return spec;
}

void BM_SolveGamma(benchmark::State& state) {
  double r = 2.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_gamma(4, r));
    r = r >= 3.9 ? 2.5 : r + 0.01;
  }
}
BENCHMARK(BM_SolveGamma);

void BM_SimulateSession(benchmark::State& state) {
  const GameConfig cfg = game_config_for(Treatment::T1);
  PopulationSpec spec = bench_population(Treatment::T1, 1);
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(simulate_session(spec, cfg));
  }
}
BENCHMARK(BM_SimulateSession);

void BM_TotalLogLikelihood(benchmark::State& state) {
  const GameConfig cfg = game_config_for(Treatment::T1);
  const SessionDataset data = simulate_session(bench_population(Treatment::T1, 3), cfg);
  const SfemModel model{GameConfig{}};
  ParamsByTreatment params;
  params[Treatment::T1] = {0.8, {0.2, 0.3, 0.4, 0.1}};
  for (auto _ : state)
    benchmark::DoNotOptimize(total_log_likelihood(data, params, model));
}
BENCHMARK(BM_TotalLogLikelihood);

void BM_Fit(benchmark::State& state) {
  const GameConfig cfg = game_config_for(Treatment::T1);
  const SessionDataset data = simulate_session(bench_population(Treatment::T1, 5), cfg);
  SfemOptions options;
  options.restarts = static_cast<int>(state.range(0));
  options.seed = 2;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, options));
}
BENCHMARK(BM_Fit)->Arg(1)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
