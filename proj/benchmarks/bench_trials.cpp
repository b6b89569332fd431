// Compares the OpenMP trial loop against the serial reference on the
// land-vehicle experiment.

#include <benchmark/benchmark.h>

#include "mckf/bench.hpp"

namespace {

using namespace mckf;

MonteCarloConfig make_config(bool parallel, std::size_t trials) {
  MonteCarloConfig cfg;
  cfg.trials = trials;
  cfg.steps = 300;
  cfg.master_seed = 42;
  cfg.noise_case = NoiseCase::Shot;
  cfg.parallel = parallel;
  cfg.filters = {FilterKind::MccKf, FilterKind::MccKfLemma, FilterKind::ImccKf,
                 FilterKind::SrImccKf, FilterKind::EsrImccKf};
  return cfg;
}

void run(benchmark::State& state, bool parallel) {
  const StateSpaceModel model = example1_model();
  const NoisePair noise = example1_noise(NoiseCase::Shot);
  const MonteCarloConfig cfg =
      make_config(parallel, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto reports =
        parallel
            ? run_monte_carlo(model, noise.process, noise.measurement, cfg)
            : run_monte_carlo_reference(model, noise.process,
                                        noise.measurement, cfg);
    benchmark::DoNotOptimize(reports);
  }
}

void BM_monte_carlo_serial(benchmark::State& state) { run(state, false); }
void BM_monte_carlo_openmp(benchmark::State& state) { run(state, true); }

BENCHMARK(BM_monte_carlo_serial)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_monte_carlo_openmp)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
