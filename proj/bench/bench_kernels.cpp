// Copyright 2026 The regionpack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "regionpack/importance.hpp"
#include "regionpack/packing.hpp"

namespace {

using namespace regionpack;

std::pair<importance::PixelField, importance::PixelField> fields(int w, int h) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> g(static_cast<std::size_t>(w) * h), d(g.size());
  for (auto& v : g) v = u(rng);
  for (auto& v : d) v = u(rng);
  return {importance::PixelField(w, h, g), importance::PixelField(w, h, d)};
}

void BM_ImportanceSerial(benchmark::State& state) {
  const auto [g, d] = fields(1280, 720);
  const auto geom = importance::MBGeometry::for_frame(1280, 720);
  for (auto _ : state) benchmark::DoNotOptimize(importance::compute_mb_importance_serial(g, d, geom));
}

void BM_ImportanceParallel(benchmark::State& state) {
  const auto [g, d] = fields(1280, 720);
  const auto geom = importance::MBGeometry::for_frame(1280, 720);
  for (auto _ : state) benchmark::DoNotOptimize(importance::compute_mb_importance(g, d, geom));
}

void BM_ShuffleSerial(benchmark::State& state) {
  const auto w = packing::synth_workload(3);
  for (auto _ : state) benchmark::DoNotOptimize(packing::shuffle_benchmark_serial(w, 20, 9));
}

void BM_ShuffleParallel(benchmark::State& state) {
  const auto w = packing::synth_workload(3);
  for (auto _ : state) benchmark::DoNotOptimize(packing::shuffle_benchmark(w, 20, 9));
}

}  // namespace

BENCHMARK(BM_ImportanceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImportanceParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShuffleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShuffleParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
