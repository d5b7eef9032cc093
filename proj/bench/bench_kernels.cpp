// Serial reference versus OpenMP kernels on protein-sized inputs.

#include "gdegan/model.hpp"
#include "gdegan/pocket.hpp"
#include "gdegan/synth.hpp"

#include <benchmark/benchmark.h>

using namespace gdegan;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_MakeGraph(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto pos = random_chain(n, rng);
  const Matrix features = Matrix::Zero(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(make_graph(pos, features, kDefaultCutoff, kDefaultMaxNeighbors, exec_of(state)));
}

void BM_LayerForward(benchmark::State& state) {
  ModelConfig cfg;
  cfg.n_d = 64;
  const ProteinGraph g = random_graph(static_cast<int>(state.range(0)), cfg.n_d, 2);
  const ModelWeights w = init_model(cfg, 3);
  const LayerState s = initial_state(g, w.init, cfg.L_max, exec_of(state));
  for (auto _ : state) benchmark::DoNotOptimize(layer_forward(s, g, w.attention[0], w.blocks[0], exec_of(state)));
}

void BM_MeanShift(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto pts = random_chain(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(mean_shift(pts, kDefaultBandwidth, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_MakeGraph)->ArgsProduct({{300, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LayerForward)->ArgsProduct({{300, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanShift)->ArgsProduct({{300, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
