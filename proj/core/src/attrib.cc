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

#include "specattr/attrib.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "specattr/error.h"
#include "specattr/parallel.h"

namespace specattr {

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kOcclusion:
      return "occlusion";
    case Method::kIntegratedGradients:
      return "ig";
    case Method::kDeepLift:
      return "deeplift";
    case Method::kConductance:
      return "conductance";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kOcclusion, Method::kIntegratedGradients, Method::kDeepLift,
                   Method::kConductance}) {
    if (MethodName(m) == name) return m;
  }
  Fail(ErrorCode::kDomain, "unknown attribution method '" + std::string(name) + "'");
}

PathRule ParsePathRule(std::string_view name) {
  if (name == "trapezoid") return PathRule::kTrapezoid;
  if (name == "midpoint") return PathRule::kMidpoint;
  Fail(ErrorCode::kDomain, "unknown integration rule '" + std::string(name) + "'");
}

std::vector<QuadratureNode> PathQuadrature(const PathConfig& path) {
  if (path.steps < 1) Fail(ErrorCode::kDomain, "path steps must be >= 1");
  const int m = path.steps;
  const double h = 1.0 / m;
  std::vector<QuadratureNode> nodes;
  if (path.rule == PathRule::kTrapezoid) {
    nodes.reserve(m + 1);
    for (int k = 0; k <= m; ++k) {
      nodes.push_back({static_cast<double>(k) / m, (k == 0 || k == m) ? 0.5 * h : h});
    }
  } else {
    nodes.reserve(m);
    for (int k = 0; k < m; ++k) nodes.push_back({(k + 0.5) / m, h});
  }
  return nodes;
}

std::vector<int64_t> MaskStarts(int64_t extent, int64_t mask, int64_t stride) {
  std::vector<int64_t> starts;
  for (int64_t s = 0; s < extent; s += stride) {
    starts.push_back(s);
    if (s + mask >= extent) break;
  }
  return starts;
}

namespace {

struct Plane {
  int64_t channels;
  int64_t height;
  int64_t width;
};

Plane PlaneOf(const Shape& shape) {
  switch (shape.size()) {
    case 1:
      return {1, 1, shape[0]};
    case 2:
      return {1, shape[0], shape[1]};
    case 3:
      return {shape[0], shape[1], shape[2]};
    default:
      Fail(ErrorCode::kShape, "occlusion supports rank 1-3 inputs, got " + ShapeToString(shape));
  }
}

double ScoreOf(const Model& model, const Tensor& input, TargetSelector target) {
  return TargetScore(model, Forward(model, input).features, target);
}

// Scores an input and masked variants of it, either directly or as the mean
// over centred hop-1 windows when the input is wider than the model.
class OcclusionScorer {
 public:
  OcclusionScorer(const Model& model, const Tensor& input, TargetSelector target, int threads)
      : model_(model), input_(input), target_(target), plane_(PlaneOf(input.shape())) {
    if (input.shape() == model.input_shape()) {
      original_ = ScoreOf(model, input, target);
      return;
    }
    const Shape& ms = model.input_shape();
    if (ms.size() != 3 || input.rank() != 3 || ms[0] != plane_.channels ||
        ms[1] != plane_.height || ms[2] % 2 == 0) {
      Fail(ErrorCode::kShape, "input " + ShapeToString(input.shape()) +
                                  " cannot be scored by a model taking " + ShapeToString(ms));
    }
    windowed_ = true;
    window_ = ms[2];
    window_scores_.resize(plane_.width);
    ParallelFor(window_scores_.size(), threads, [&](size_t t) {
      window_scores_[t] = ScoreOf(model_, Window(static_cast<int64_t>(t), nullptr), target_);
    });
    original_ = Mean(window_scores_);
  }

  double original() const { return original_; }

  double Masked(int64_t r0, int64_t r1, int64_t c0, int64_t c1, float fill) const {
    const Rect rect{r0, r1, c0, c1, fill};
    if (!windowed_) {
      std::vector<float> v(input_.values().begin(), input_.values().end());
      for (int64_t c = 0; c < plane_.channels; ++c) {
        for (int64_t r = r0; r < r1; ++r) {
          for (int64_t x = c0; x < c1; ++x) {
            v[(c * plane_.height + r) * plane_.width + x] = fill;
          }
        }
      }
      return ScoreOf(model_, Tensor(input_.shape(), std::move(v)), target_);
    }
    const int64_t half = window_ / 2;
    std::vector<double> scores = window_scores_;
    const int64_t t_lo = std::max<int64_t>(0, c0 - half);
    const int64_t t_hi = std::min<int64_t>(plane_.width, c1 + half);
    for (int64_t t = t_lo; t < t_hi; ++t) scores[t] = ScoreOf(model_, Window(t, &rect), target_);
    return Mean(scores);
  }

 private:
  struct Rect {
    int64_t r0, r1, c0, c1;
    float fill;
  };

  static double Mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (double s : v) sum += s;
    return sum / static_cast<double>(v.size());
  }

  // Zero-padded window of width window_ centred on column t.
  Tensor Window(int64_t t, const Rect* mask) const {
    const int64_t half = window_ / 2;
    std::vector<float> v(static_cast<size_t>(plane_.channels * plane_.height * window_), 0.0f);
    const auto src = input_.values();
    for (int64_t c = 0; c < plane_.channels; ++c) {
      for (int64_t r = 0; r < plane_.height; ++r) {
        for (int64_t j = 0; j < window_; ++j) {
          const int64_t col = t - half + j;
          if (col < 0 || col >= plane_.width) continue;
          float value = src[(c * plane_.height + r) * plane_.width + col];
          if (mask && r >= mask->r0 && r < mask->r1 && col >= mask->c0 && col < mask->c1) {
            value = mask->fill;
          }
          v[(c * plane_.height + r) * window_ + j] = value;
        }
      }
    }
    return Tensor(model_.input_shape(), std::move(v));
  }

  const Model& model_;
  const Tensor& input_;
  TargetSelector target_;
  Plane plane_;
  bool windowed_ = false;
  int64_t window_ = 0;
  std::vector<double> window_scores_;
  double original_ = 0.0;
};

std::vector<double> DeltaOf(const Tensor& input, const Tensor& baseline) {
  std::vector<double> d(input.size());
  for (size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<double>(input[i]) - static_cast<double>(baseline[i]);
  }
  return d;
}

void CheckTargets(const Model& model, std::span<const TargetSelector> targets) {
  for (TargetSelector t : targets) model.CheckTarget(t);
}

void CheckPair(const Model& model, const Tensor& input, const Tensor& baseline) {
  CheckSameShape(input, baseline, "input vs baseline");
  if (input.shape() != model.input_shape()) {
    Fail(ErrorCode::kShape, "input " + ShapeToString(input.shape()) +
                                " does not match model input " +
                                ShapeToString(model.input_shape()));
  }
}

AttributionMap Finish(Tensor values, Method method, TargetSelector target,
                      const Tensor& baseline, double f_input, double f_baseline) {
  AttributionMap map;
  map.values = std::move(values);
  map.method = method;
  map.target = target;
  map.baseline_id = ContentHash(baseline);
  map.completeness_gap = std::abs(ReduceSum(map.values) - (f_input - f_baseline));
  return map;
}

}  // namespace

OcclusionResult Occlusion(const Model& model, const Tensor& input, const MaskConfig& cfg,
                          TargetSelector target, int threads) {
  model.CheckTarget(target);
  if (cfg.mask_height < 1 || cfg.mask_width < 1 || cfg.stride_height < 1 ||
      cfg.stride_width < 1) {
    Fail(ErrorCode::kDomain, "mask and stride extents must be >= 1");
  }
  if (!std::isfinite(cfg.fill)) Fail(ErrorCode::kDomain, "mask fill must be finite");
  const Plane plane = PlaneOf(input.shape());
  if (cfg.mask_height > plane.height || cfg.mask_width > plane.width) {
    Fail(ErrorCode::kMaskTooLarge, "mask " + std::to_string(cfg.mask_height) + "x" +
                                       std::to_string(cfg.mask_width) + " exceeds input plane " +
                                       std::to_string(plane.height) + "x" +
                                       std::to_string(plane.width));
  }
  const OcclusionScorer scorer(model, input, target, threads);

  OcclusionResult result;
  result.row_starts = MaskStarts(plane.height, cfg.mask_height, cfg.stride_height);
  result.col_starts = MaskStarts(plane.width, cfg.mask_width, cfg.stride_width);
  result.original_score = scorer.original();
  const size_t cols = result.col_starts.size();
  result.influence.assign(result.row_starts.size() * cols, 0.0);
  ParallelFor(result.influence.size(), threads, [&](size_t p) {
    const int64_t r0 = result.row_starts[p / cols];
    const int64_t c0 = result.col_starts[p % cols];
    const int64_t r1 = std::min(r0 + cfg.mask_height, plane.height);
    const int64_t c1 = std::min(c0 + cfg.mask_width, plane.width);
    result.influence[p] = result.original_score - scorer.Masked(r0, r1, c0, c1, cfg.fill);
  });

  const size_t pixels = static_cast<size_t>(plane.height * plane.width);
  result.coverage.assign(pixels, 0);
  std::vector<double> sums(pixels, 0.0);
  for (size_t p = 0; p < result.influence.size(); ++p) {
    const int64_t r0 = result.row_starts[p / cols];
    const int64_t c0 = result.col_starts[p % cols];
    const int64_t r1 = std::min(r0 + cfg.mask_height, plane.height);
    const int64_t c1 = std::min(c0 + cfg.mask_width, plane.width);
    for (int64_t r = r0; r < r1; ++r) {
      for (int64_t c = c0; c < c1; ++c) {
        sums[r * plane.width + c] += result.influence[p];
        result.coverage[r * plane.width + c] += 1;
      }
    }
  }
  std::vector<float> values(input.size());
  for (int64_t ch = 0; ch < plane.channels; ++ch) {
    for (size_t i = 0; i < pixels; ++i) {
      const int32_t n = result.coverage[i];
      values[ch * pixels + i] = n > 0 ? static_cast<float>(sums[i] / n) : 0.0f;
    }
  }
  result.map.values = Tensor(input.shape(), std::move(values));
  result.map.method = Method::kOcclusion;
  result.map.target = target;
  return result;
}

std::vector<AttributionMap> IntegratedGradients(const Model& model, const Tensor& input,
                                                const Tensor& baseline,
                                                std::span<const TargetSelector> targets,
                                                const PathConfig& path) {
  CheckPair(model, input, baseline);
  CheckTargets(model, targets);
  const std::vector<QuadratureNode> nodes = PathQuadrature(path);
  std::vector<std::vector<double>> seeds;
  for (TargetSelector t : targets) seeds.push_back(TargetSeed(model, t));

  std::vector<std::vector<double>> acc(targets.size(), std::vector<double>(input.size(), 0.0));
  std::vector<double> f_input(targets.size()), f_baseline(targets.size());
  bool have_input = false, have_baseline = false;
  for (const QuadratureNode& node : nodes) {
    const ForwardResult fwd = Forward(model, PathPoint(input, baseline, node.alpha));
    for (size_t t = 0; t < targets.size(); ++t) {
      const std::vector<double> g = Backpropagate(model, fwd.trace, 0, seeds[t]);
      std::vector<double>& a = acc[t];
      for (size_t i = 0; i < a.size(); ++i) a[i] += node.weight * g[i];
      if (node.alpha == 0.0) f_baseline[t] = TargetScore(model, fwd.features, targets[t]);
      if (node.alpha == 1.0) f_input[t] = TargetScore(model, fwd.features, targets[t]);
    }
    have_baseline |= node.alpha == 0.0;
    have_input |= node.alpha == 1.0;
  }
  if (!have_baseline || !have_input) {
    const ForwardResult fx = Forward(model, input);
    const ForwardResult fr = Forward(model, baseline);
    for (size_t t = 0; t < targets.size(); ++t) {
      f_input[t] = TargetScore(model, fx.features, targets[t]);
      f_baseline[t] = TargetScore(model, fr.features, targets[t]);
    }
  }

  const std::vector<double> delta = DeltaOf(input, baseline);
  std::vector<AttributionMap> maps;
  maps.reserve(targets.size());
  for (size_t t = 0; t < targets.size(); ++t) {
    std::vector<double>& a = acc[t];
    for (size_t i = 0; i < a.size(); ++i) a[i] *= delta[i];
    maps.push_back(Finish(ToTensor(input.shape(), a), Method::kIntegratedGradients, targets[t],
                          baseline, f_input[t], f_baseline[t]));
  }
  return maps;
}

AttributionMap IntegratedGradients(const Model& model, const Tensor& input,
                                   const Tensor& baseline, TargetSelector target,
                                   const PathConfig& path) {
  return std::move(IntegratedGradients(model, input, baseline, std::span(&target, 1), path)[0]);
}

std::vector<AttributionMap> DeepLiftRescale(const Model& model, const Tensor& input,
                                            const Tensor& baseline,
                                            std::span<const TargetSelector> targets) {
  CheckPair(model, input, baseline);
  CheckTargets(model, targets);
  const ForwardResult fx = Forward(model, input);
  const ForwardResult fr = Forward(model, baseline);
  const RescaleReference reference{&fr.trace, kRescaleEpsilon};
  const std::vector<double> delta = DeltaOf(input, baseline);
  std::vector<AttributionMap> maps;
  maps.reserve(targets.size());
  for (TargetSelector target : targets) {
    std::vector<double> m =
        Backpropagate(model, fx.trace, 0, TargetSeed(model, target), &reference);
    for (size_t i = 0; i < m.size(); ++i) m[i] *= delta[i];
    maps.push_back(Finish(ToTensor(input.shape(), m), Method::kDeepLift, target, baseline,
                          TargetScore(model, fx.features, target),
                          TargetScore(model, fr.features, target)));
  }
  return maps;
}

AttributionMap DeepLiftRescale(const Model& model, const Tensor& input,
                               const Tensor& baseline, TargetSelector target) {
  return std::move(DeepLiftRescale(model, input, baseline, std::span(&target, 1))[0]);
}

AttributionMap Conductance(const Model& model, const Tensor& input, const Tensor& baseline,
                           size_t layer, TargetSelector target, const PathConfig& path) {
  CheckPair(model, input, baseline);
  model.CheckTarget(target);
  if (layer > model.layer_count()) {
    Fail(ErrorCode::kLayerOutOfRange, "layer " + std::to_string(layer) + " outside [0," +
                                          std::to_string(model.layer_count()) + "]");
  }
  if (path.steps < 1) Fail(ErrorCode::kDomain, "path steps must be >= 1");
  const int m = path.steps;
  const std::vector<double> seed = TargetSeed(model, target);
  const size_t units = static_cast<size_t>(NumElements(model.activation_shape(layer)));

  auto hidden_at = [&](double alpha, std::vector<double>* grad, double* score) {
    const ForwardResult fwd = Forward(model, PathPoint(input, baseline, alpha));
    if (grad != nullptr) *grad = Backpropagate(model, fwd.trace, layer, seed);
    if (score != nullptr) *score = TargetScore(model, fwd.features, target);
    const auto y = fwd.trace.activations[layer].values();
    return std::vector<double>(y.begin(), y.end());
  };

  std::vector<double> cond(units, 0.0);
  double f_input = 0.0, f_baseline = 0.0;
  std::vector<double> g_prev, g_cur;
  std::vector<double> y_prev = hidden_at(0.0, path.rule == PathRule::kTrapezoid ? &g_prev : nullptr,
                                         &f_baseline);
  for (int k = 1; k <= m; ++k) {
    const double alpha = static_cast<double>(k) / m;
    const std::vector<double> y_cur = hidden_at(
        alpha, path.rule == PathRule::kTrapezoid ? &g_cur : nullptr, k == m ? &f_input : nullptr);
    if (path.rule == PathRule::kTrapezoid) {
      for (size_t j = 0; j < units; ++j) {
        cond[j] += 0.5 * (g_prev[j] + g_cur[j]) * (y_cur[j] - y_prev[j]);
      }
      g_prev.swap(g_cur);
    } else {
      std::vector<double> g_mid;
      hidden_at((k - 0.5) / m, &g_mid, nullptr);
      for (size_t j = 0; j < units; ++j) cond[j] += g_mid[j] * (y_cur[j] - y_prev[j]);
    }
    y_prev = y_cur;
  }
  AttributionMap map = Finish(ToTensor(model.activation_shape(layer), cond),
                              Method::kConductance, target, baseline, f_input, f_baseline);
  map.layer = layer;
  return map;
}

double CompletenessGap(const AttributionMap& map, const Model& model, const Tensor& input,
                       const Tensor& baseline) {
  if (map.method == Method::kOcclusion) {
    Fail(ErrorCode::kMethodMismatch, "occlusion maps carry no completeness contract");
  }
  CheckPair(model, input, baseline);
  const double f_input = TargetScore(model, Forward(model, input).features, map.target);
  const double f_baseline = TargetScore(model, Forward(model, baseline).features, map.target);
  return std::abs(ReduceSum(map.values) - (f_input - f_baseline));
}

}  // namespace specattr
