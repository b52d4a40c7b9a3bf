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

#ifndef SPECATTR_NET_H_
#define SPECATTR_NET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specattr/tensor.h"

namespace specattr {

enum class LayerKind {
  kConv2d,
  kRelu,
  kMaxPool2d,
  kAvgPool2d,
  kGlobalAvgPool,
  kFlatten,
  kDense,
};

std::string_view LayerKindName(LayerKind kind);
// Throws UnknownLayerKind.
LayerKind ParseLayerKind(std::string_view name);

struct Extent2d {
  int64_t h = 1;
  int64_t w = 1;

  bool operator==(const Extent2d&) const = default;
};

// One entry of the layer catalog. Only the fields relevant to `kind` are
// meaningful:
//   conv2d:   in/out channels, kernel, stride, padding; weights [out,in,kh,kw]
//   pools:    kernel (the window) and stride, no padding
//   dense:    in_dim/out_dim; weights [out,in]; accepts any input whose
//             element count is in_dim and produces [out_dim]
//   relu, flatten, globalavgpool: no parameters
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  Extent2d kernel;
  Extent2d stride;
  Extent2d padding{0, 0};
  int64_t in_dim = 0;
  int64_t out_dim = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  static LayerSpec Conv2d(int64_t in_channels, int64_t out_channels,
                          Extent2d kernel, Extent2d stride, Extent2d padding,
                          std::vector<float> weights, std::vector<float> bias);
  static LayerSpec Relu();
  static LayerSpec MaxPool2d(Extent2d window, Extent2d stride);
  static LayerSpec AvgPool2d(Extent2d window, Extent2d stride);
  static LayerSpec GlobalAvgPool();
  static LayerSpec Flatten();
  static LayerSpec Dense(int64_t in_dim, int64_t out_dim,
                         std::vector<float> weights, std::vector<float> bias);

  bool has_weights() const {
    return kind == LayerKind::kConv2d || kind == LayerKind::kDense;
  }
  // Number of weight plus bias parameters the hyperparameters call for.
  size_t DeclaredParameterCount() const;
};

// Which scalar an attribution explains: one output feature channel, or the
// optional dense head mapping all features to a single score.
class TargetSelector {
 public:
  static TargetSelector Feature(int64_t k) { return TargetSelector(k); }
  static TargetSelector Head() { return TargetSelector(-1); }
  // Accepts "feature:K" and "head"; throws DomainError otherwise.
  static TargetSelector Parse(std::string_view text);

  bool is_head() const { return feature_ < 0; }
  int64_t feature() const { return feature_; }
  std::string ToString() const;

  bool operator==(const TargetSelector&) const = default;

 private:
  explicit TargetSelector(int64_t feature) : feature_(feature) {}
  int64_t feature_;
};

// An immutable, fully shape-checked layer stack. The last feature layer
// must produce a rank-1 tensor; its length is the feature count.
class Model {
 public:
  Model(Shape input_shape, std::vector<LayerSpec> layers,
        std::optional<LayerSpec> head = std::nullopt,
        std::optional<uint64_t> seed = std::nullopt);

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  size_t layer_count() const { return layers_.size(); }
  // Statically planned shape of trace entry i, i in [0, layer_count()].
  const Shape& activation_shape(size_t i) const { return plan_.at(i); }
  int64_t output_dim() const { return plan_.back()[0]; }
  bool has_head() const { return head_.has_value(); }
  const LayerSpec& head() const { return *head_; }
  std::optional<uint64_t> seed() const { return seed_; }

  // Throws TargetOutOfRange for an invalid feature index or a head target on
  // a model without head.
  void CheckTarget(TargetSelector target) const;

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::optional<LayerSpec> head_;
  std::optional<uint64_t> seed_;
  std::vector<Shape> plan_;
};

// trace.activations[0] is the input; activations[i+1] = layers[i](activations[i]).
struct ActivationTrace {
  std::vector<Tensor> activations;

  const Tensor& input() const { return activations.front(); }
  const Tensor& output() const { return activations.back(); }
};

struct ForwardResult {
  std::vector<float> features;
  ActivationTrace trace;
};

// Throws ShapeError when input.shape() != model.input_shape().
ForwardResult Forward(const Model& model, const Tensor& input);

// The value of `target` given the feature vector. The head is evaluated with
// a double accumulator.
double TargetScore(const Model& model, std::span<const float> features,
                   TargetSelector target);

// Network evaluation in double precision starting from trace entry
// `from_layer` (0 = the input), returning layer_count()+1 activations with the
// entries before from_layer left empty. Shares the layer kernels with Forward
// but none of the reverse-mode code; the finite-difference oracles are built
// on it.
std::vector<std::vector<double>> ForwardDouble(const Model& model,
                                               std::span<const double> input,
                                               size_t from_layer = 0);
double TargetScoreDouble(const Model& model, std::span<const double> features,
                         TargetSelector target);

// d(target)/d(features).
std::vector<double> TargetSeed(const Model& model, TargetSelector target);

// Reference trace for the DeepLIFT Rescale rule. When supplied to
// Backpropagate, ReLU layers use the multiplier dOut/dIn (falling back to the
// local gradient when |dIn| < epsilon) and max pools route the whole output
// difference to the first argmax of the traced input window. Affine layers
// and average pools are unaffected: their multipliers equal their gradients.
struct RescaleReference {
  const ActivationTrace* trace = nullptr;
  double epsilon = 1e-7;
};

// Reverse propagation of `seed` (an adjoint for trace entry layer_count())
// down to trace entry `to_layer`. Without a reference this is the ordinary
// gradient, with ReLU'(0) = 0 and max-pool ties going to the first index in
// row-major order.
std::vector<double> Backpropagate(const Model& model,
                                  const ActivationTrace& trace,
                                  size_t to_layer, std::vector<double> seed,
                                  const RescaleReference* rescale = nullptr);

// d(target)/d(input) at the traced point.
Tensor BackwardInputGrad(const Model& model, const ActivationTrace& trace,
                         TargetSelector target);

// d(target)/d(trace[layer]). Throws LayerOutOfRange, TargetOutOfRange.
Tensor BackwardFromLayer(const Model& model, const ActivationTrace& trace,
                         size_t layer, TargetSelector target);

// Rounds a double buffer into a tensor; throws InvariantViolation on
// non-finite values.
Tensor ToTensor(const Shape& shape, std::span<const double> values);

}  // namespace specattr

#endif  // SPECATTR_NET_H_
