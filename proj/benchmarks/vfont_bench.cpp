// Copyright 2026 The vfont Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "vfont/geometry.hpp"
#include "vfont/losses.hpp"
#include "vfont/synth.hpp"
#include "vfont/training.hpp"

namespace {

using namespace vfont;

PointCloud random_cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 255);
  PointCloud c(n);
  for (Point& p : c) p = {u(rng), u(rng)};
  return c;
}

void BM_Chamfer(benchmark::State& state, NearestNeighbor method) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const PointCloud a = random_cloud(rng, n), b = random_cloud(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance(a, b, method));
  state.SetComplexityN(n);
}
BENCHMARK_CAPTURE(BM_Chamfer, brute, NearestNeighbor::kBruteForce)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK_CAPTURE(BM_Chamfer, grid, NearestNeighbor::kGrid)->RangeMultiplier(4)->Range(64, 4096);

const DatasetSplit& bench_data() {
  static const DatasetSplit d = synth_dataset(7, 2, 8);
  return d;
}

void BM_Rasterize(benchmark::State& state) {
  const Glyph& g = bench_data().glyph("style01", "c003");
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(g, res, res));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128)->Arg(256);

void BM_GlyphChamferLoss(benchmark::State& state) {
  const PaddedGlyph t = pad_to_fixed(bench_data().glyph("style01", "c003"), 12, 100);
  Prediction p = Prediction::zeros(12, 100);
  p.decoded.assign(12, 1);
  p.args = t.args;
  for (double& a : p.args) a = std::max(0.0, a) + 1.5;
  const int n_p = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Prediction grad = Prediction::zeros(12, 100);
    benchmark::DoNotOptimize(chamfer_loss(p, t, n_p, &grad));
  }
}
BENCHMARK(BM_GlyphChamferLoss)->Arg(9)->Arg(99);

// One optimizer step at batch 8; range(0) is the model width.
void BM_TrainStep(benchmark::State& state) {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.dim = static_cast<int>(state.range(0));
  cfg.mlp_dim = 2 * cfg.dim;
  cfg.heads = cfg.dim >= 128 ? 8 : 4;
  const DatasetSplit& data = bench_data();
  TrainState s = TrainState::fresh(cfg);
  for (auto _ : state) {
    TrainHooks hooks;
    hooks.stop_at = s.step + 1;
    train(cfg, data, s, hooks);
  }
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
