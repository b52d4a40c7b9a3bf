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

#ifndef SPECATTR_ATTRIB_H_
#define SPECATTR_ATTRIB_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specattr/net.h"
#include "specattr/tensor.h"

namespace specattr {

enum class Method { kOcclusion, kIntegratedGradients, kDeepLift, kConductance };

// "occlusion", "ig", "deeplift", "conductance".
std::string_view MethodName(Method method);
// Throws DomainError.
Method ParseMethod(std::string_view name);

// Relevance values aligned 1:1 with the explained tensor. Positive relevance
// always means the region pushed the target score up relative to the
// baseline (or, for occlusion, relative to the masked input).
struct AttributionMap {
  Tensor values;
  Method method = Method::kIntegratedGradients;
  TargetSelector target = TargetSelector::Feature(0);
  // ContentHash of the baseline; absent for occlusion.
  std::optional<std::string> baseline_id;
  // |sum(values) - (F(x) - F(x'))|; absent for occlusion.
  std::optional<double> completeness_gap;
  // Trace index explained by a conductance map; absent otherwise.
  std::optional<size_t> layer;
};

struct MaskConfig {
  int64_t mask_height = 1;
  int64_t mask_width = 1;
  int64_t stride_height = 1;
  int64_t stride_width = 1;
  float fill = 0.0f;
};

enum class PathRule { kTrapezoid, kMidpoint };

struct PathConfig {
  int steps = 64;
  PathRule rule = PathRule::kTrapezoid;
};

// Throws DomainError on an unknown name ("trapezoid" or "midpoint").
PathRule ParsePathRule(std::string_view name);

struct QuadratureNode {
  double alpha;
  double weight;
};

// Trapezoid: alpha_k = k/m, k = 0..m, weights 1/(2m) at the ends and 1/m
// elsewhere. Midpoint: alpha_k = (k + 1/2)/m, k = 0..m-1, weights 1/m.
// Throws DomainError when steps < 1.
std::vector<QuadratureNode> PathQuadrature(const PathConfig& path);

// Mask start offsets along one axis: 0, stride, 2*stride, ... stopping at the
// first mask that reaches the far edge, so a stride <= mask never leaves a
// pixel uncovered. Masks past the edge are clipped.
std::vector<int64_t> MaskStarts(int64_t extent, int64_t mask, int64_t stride);

struct OcclusionResult {
  // Mask offsets; influence is row-major [row_starts.size() x col_starts.size()].
  std::vector<int64_t> row_starts;
  std::vector<int64_t> col_starts;
  std::vector<double> influence;
  // Masks covering each pixel of the H x W plane.
  std::vector<int32_t> coverage;
  double original_score = 0.0;
  // Each pixel holds the mean influence of the masks covering it (0 where
  // uncovered); same shape as the input.
  AttributionMap map;

  size_t evaluations() const { return influence.size(); }
};

// Slides a mask over the last two axes of `input` (all channels at once; a
// rank-1 input is treated as a single row). influence = score(original) -
// score(masked).
//
// When the input has the model's input shape it is scored directly. An input
// [C, H, T] wider than a model taking [C, H, W] (W odd) is scored as the
// mean target over all T centred, zero-padded, hop-1 windows, which is how a
// whole spectrogram is scored by a segment-level model. Only windows touched
// by a mask are re-evaluated.
//
// Throws MaskTooLarge, DomainError (non-positive mask or stride),
// TargetOutOfRange, ShapeError.
OcclusionResult Occlusion(const Model& model, const Tensor& input, const MaskConfig& cfg,
                          TargetSelector target, int threads = 1);

// Path integral of gradients from baseline to input by the chosen quadrature.
// Forward passes along the path are shared by all targets.
std::vector<AttributionMap> IntegratedGradients(const Model& model, const Tensor& input,
                                                const Tensor& baseline,
                                                std::span<const TargetSelector> targets,
                                                const PathConfig& path = {});
AttributionMap IntegratedGradients(const Model& model, const Tensor& input,
                                   const Tensor& baseline, TargetSelector target,
                                   const PathConfig& path = {});

inline constexpr double kRescaleEpsilon = 1e-7;

// DeepLIFT with the Rescale rule for ReLU (local gradient when |dIn| < 1e-7),
// the Linear rule for affine layers and average pools, and max pools routing
// the whole difference to the input's first argmax (completeness is only
// approximate there).
std::vector<AttributionMap> DeepLiftRescale(const Model& model, const Tensor& input,
                                            const Tensor& baseline,
                                            std::span<const TargetSelector> targets);
AttributionMap DeepLiftRescale(const Model& model, const Tensor& input,
                               const Tensor& baseline, TargetSelector target);

// Conductance of every unit of trace[layer]:
//   cond_j = sum_k gbar_kj * (y_j(alpha_k) - y_j(alpha_{k-1}))
// over the step grid alpha_k = k/m, where gbar is the quadrature-consistent
// gradient on step k (trapezoid: mean of both ends; midpoint: the step
// midpoint). At layer 0 this reproduces IntegratedGradients with the same
// PathConfig. completeness_gap is the layer-sum gap.
// Throws LayerOutOfRange, TargetOutOfRange, ShapeError.
AttributionMap Conductance(const Model& model, const Tensor& input, const Tensor& baseline,
                           size_t layer, TargetSelector target, const PathConfig& path = {});

// |ReduceSum(map.values) - (F(input) - F(baseline))| for map.target.
// Throws MethodMismatch for occlusion maps.
double CompletenessGap(const AttributionMap& map, const Model& model, const Tensor& input,
                       const Tensor& baseline);

}  // namespace specattr

#endif  // SPECATTR_ATTRIB_H_
