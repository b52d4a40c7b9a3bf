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

#include "specattr/presets.h"

#include <cmath>
#include <utility>
#include <vector>

#include "specattr/error.h"
#include "specattr/rng.h"

namespace specattr {
namespace {

std::vector<float> UniformVector(Lcg& rng, size_t n, double limit) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.Uniform(-limit, limit));
  return v;
}

LayerSpec RandomConv(Lcg& rng, int64_t in_ch, int64_t out_ch) {
  const size_t fan_in = static_cast<size_t>(in_ch * 9);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<float> w = UniformVector(rng, static_cast<size_t>(out_ch) * fan_in, limit);
  std::vector<float> b = UniformVector(rng, static_cast<size_t>(out_ch), 0.1);
  return LayerSpec::Conv2d(in_ch, out_ch, {3, 3}, {1, 1}, {1, 1}, std::move(w),
                           std::move(b));
}

}  // namespace

Model MakeNisqaLikeModel(uint64_t seed, const NisqaLikeOptions& options) {
  Lcg rng(seed);
  std::vector<LayerSpec> layers;
  layers.push_back(RandomConv(rng, 1, 8));
  layers.push_back(LayerSpec::Relu());
  layers.push_back(LayerSpec::AvgPool2d({2, 2}, {2, 2}));
  layers.push_back(RandomConv(rng, 8, 16));
  layers.push_back(LayerSpec::Relu());
  layers.push_back(LayerSpec::AvgPool2d({2, 2}, {2, 2}));
  layers.push_back(RandomConv(rng, 16, kDemoFeatureCount));
  layers.push_back(LayerSpec::Relu());
  layers.push_back(LayerSpec::GlobalAvgPool());
  std::optional<LayerSpec> head;
  if (options.with_head) {
    const double limit = std::sqrt(6.0 / static_cast<double>(kDemoFeatureCount));
    head = LayerSpec::Dense(kDemoFeatureCount, 1,
                            UniformVector(rng, kDemoFeatureCount, limit),
                            UniformVector(rng, 1, 0.1));
  }
  return Model({1, kSpectrogramHeight, options.segment_width}, std::move(layers),
               std::move(head), seed);
}

Model MakeLinearFixture() { return MakeLinearModel({2.0f, 3.0f}, 0.0f); }

Model MakeLinearModel(const std::vector<float>& weights, float bias) {
  const auto n = static_cast<int64_t>(weights.size());
  return Model({n}, {LayerSpec::Dense(n, 1, weights, {bias})});
}

Model WithMirroredFeature(const Model& model, int64_t src, int64_t dst, float sign) {
  const int64_t f = model.output_dim();
  if (src < 0 || src >= f || dst < 0 || dst >= f) {
    Fail(ErrorCode::kTargetOutOfRange, "mirrored feature index outside [0," +
                                           std::to_string(f) + ")");
  }
  std::vector<float> w(static_cast<size_t>(f * f), 0.0f);
  for (int64_t i = 0; i < f; ++i) w[i * f + i] = 1.0f;
  w[dst * f + dst] = 0.0f;
  w[dst * f + src] = sign;
  std::vector<LayerSpec> layers = model.layers();
  layers.push_back(LayerSpec::Dense(f, f, std::move(w), std::vector<float>(f, 0.0f)));
  std::optional<LayerSpec> head;
  if (model.has_head()) head = model.head();
  return Model(model.input_shape(), std::move(layers), std::move(head), model.seed());
}

}  // namespace specattr
