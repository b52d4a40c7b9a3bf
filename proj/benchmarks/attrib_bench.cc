// Copyright 2026 The specattr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <vector>

#include <benchmark/benchmark.h>

#include "specattr/attrib.h"
#include "specattr/net.h"
#include "specattr/presets.h"
#include "specattr/rng.h"

namespace specattr {
namespace {

Tensor Input(int64_t width, uint64_t seed) {
  Lcg rng(seed);
  std::vector<float> v(static_cast<size_t>(48 * width));
  for (float& x : v) x = static_cast<float>(rng.Uniform());
  return Tensor({1, 48, width}, std::move(v));
}

void BM_Forward(benchmark::State& state) {
  const Model m = MakeNisqaLikeModel(1);
  const Tensor x = Input(15, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(m, x).features);
}
BENCHMARK(BM_Forward);

void BM_BackwardInputGrad(benchmark::State& state) {
  const Model m = MakeNisqaLikeModel(1);
  const ForwardResult f = Forward(m, Input(15, 2));
  for (auto _ : state) benchmark::DoNotOptimize(BackwardInputGrad(m, f.trace, TargetSelector::Head()));
}
BENCHMARK(BM_BackwardInputGrad);

// IG for one segment and all 20 features, as run by the pipeline.
void BM_IntegratedGradientsSegment(benchmark::State& state) {
  const Model m = MakeNisqaLikeModel(1);
  const Tensor x = Input(15, 3);
  const Tensor b = Tensor::Filled({1, 48, 15}, 0.0f);
  std::vector<TargetSelector> targets;
  for (int64_t k = 0; k < 20; ++k) targets.push_back(TargetSelector::Feature(k));
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(IntegratedGradients(m, x, b, targets, {steps}));
}
BENCHMARK(BM_IntegratedGradientsSegment)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DeepLiftSegment(benchmark::State& state) {
  const Model m = MakeNisqaLikeModel(1);
  const Tensor x = Input(15, 3);
  const Tensor b = Tensor::Filled({1, 48, 15}, 0.0f);
  for (auto _ : state) benchmark::DoNotOptimize(DeepLiftRescale(m, x, b, TargetSelector::Head()));
}
BENCHMARK(BM_DeepLiftSegment);

void BM_OcclusionFullSample(benchmark::State& state) {
  const Model m = MakeNisqaLikeModel(1);
  const Tensor x = Input(1300, 4);
  const int64_t mask = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Occlusion(m, x, {mask, mask, mask, mask, 0.0f}, TargetSelector::Head()));
  }
}
BENCHMARK(BM_OcclusionFullSample)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace specattr

BENCHMARK_MAIN();
