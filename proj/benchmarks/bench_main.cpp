#include <benchmark/benchmark.h>

#include <random>

#include "poscon/protocol.hpp"
#include "poscon/scenario_io.hpp"
#include "poscon/sim.hpp"
#include "poscon/systems.hpp"

using namespace poscon;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = d(rng);
  return m;
}

Scenario example(Mode mode, std::size_t horizon) {
  ResolveOptions opts;
  opts.mode = mode;
  opts.horizon = horizon;
  return resolve_scenario(load_scenario_config(POSCON_SCENARIO_DIR "/paper_example.json"), opts);
}

}  // namespace

static void BM_SpectralRadius(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Matrix m = random_matrix(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(m));
}
BENCHMARK(BM_SpectralRadius)->Arg(4)->Arg(16)->Arg(64);

static void BM_RunScenario(benchmark::State& state) {
  const Scenario s = example(static_cast<Mode>(state.range(0)), 500);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s));
}
BENCHMARK(BM_RunScenario)
    ->Arg(static_cast<int>(Mode::StateFeedback))
    ->Arg(static_cast<int>(Mode::OutputFeedback))
    ->Arg(static_cast<int>(Mode::ObserverOnly));

static void BM_SynthesizeStateGain(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(rng, n);
  a = a * (0.9 / spectral_radius(a));
  Matrix b(n, 1);
  for (std::size_t i = 0; i < n; ++i) b(i, 0) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_state_gain(a, b));
}
BENCHMARK(BM_SynthesizeStateGain)->Arg(2)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
