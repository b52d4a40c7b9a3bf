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

#include "specattr/validate.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "specattr/error.h"
#include "specattr/parallel.h"
#include "specattr/rng.h"

namespace specattr {
namespace {

bool Near(double v) { return std::abs(v) < kKinkTolerance; }

bool SignDiffers(double a, double b) { return (a > 0.0) != (b > 0.0); }

// Max-pool windows touched by the perturbation whose winner is unstable.
bool MaxPoolKink(const LayerSpec& l, const Shape& in, const Shape& out,
                 const std::vector<double>& c, const std::vector<double>& p,
                 const std::vector<double>& m) {
  const int64_t ch = in[0], h = in[1], w = in[2];
  const int64_t ho = out[1], wo = out[2];
  for (int64_t k = 0; k < ch; ++k) {
    for (int64_t y = 0; y < ho; ++y) {
      for (int64_t x = 0; x < wo; ++x) {
        bool touched = false;
        size_t arg[3] = {0, 0, 0};
        double gap[3] = {INFINITY, INFINITY, INFINITY};
        const std::vector<double>* v[3] = {&c, &p, &m};
        for (int s = 0; s < 3; ++s) {
          double best = -INFINITY, second = -INFINITY;
          for (int64_t i = 0; i < l.kernel.h; ++i) {
            for (int64_t j = 0; j < l.kernel.w; ++j) {
              const size_t idx = static_cast<size_t>(
                  (k * h + y * l.stride.h + i) * w + x * l.stride.w + j);
              const double val = (*v[s])[idx];
              if (s == 0 && p[idx] != m[idx]) touched = true;
              if (val > best) {
                second = best;
                best = val;
                arg[s] = idx;
              } else if (val > second) {
                second = val;
              }
            }
          }
          gap[s] = best - second;
        }
        if (!touched) continue;
        if (arg[0] != arg[1] || arg[0] != arg[2]) return true;
        if (Near(gap[0]) || Near(gap[1]) || Near(gap[2])) return true;
      }
    }
  }
  return false;
}

bool ProbeNearKink(const Model& model, size_t from, const std::vector<std::vector<double>>& c,
                   const std::vector<std::vector<double>>& p,
                   const std::vector<std::vector<double>>& m) {
  for (size_t l = from; l < model.layer_count(); ++l) {
    const LayerSpec& spec = model.layers()[l];
    if (spec.kind == LayerKind::kRelu) {
      for (size_t u = 0; u < c[l].size(); ++u) {
        if (p[l][u] == m[l][u]) continue;
        if (Near(c[l][u]) || Near(p[l][u]) || Near(m[l][u]) || SignDiffers(p[l][u], m[l][u])) {
          return true;
        }
      }
    } else if (spec.kind == LayerKind::kMaxPool2d) {
      if (MaxPoolKink(spec, model.activation_shape(l), model.activation_shape(l + 1), c[l],
                      p[l], m[l])) {
        return true;
      }
    }
  }
  return false;
}

std::vector<float> SignedUniform(Lcg& rng, size_t n, double lo, double hi) {
  std::vector<float> v(n);
  for (float& x : v) {
    const double mag = rng.Uniform(lo, hi);
    x = static_cast<float>(rng.Below(2) == 0 ? mag : -mag);
  }
  return v;
}

std::vector<float> UniformVector(Lcg& rng, size_t n, double lo, double hi) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.Uniform(lo, hi));
  return v;
}

// Gauss-Jordan with partial pivoting on a row-major n x n matrix.
std::vector<double> Invert(std::vector<double> a, int64_t n) {
  std::vector<double> inv(static_cast<size_t>(n * n), 0.0);
  for (int64_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int64_t col = 0; col < n; ++col) {
    int64_t pivot = col;
    for (int64_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) Fail(ErrorCode::kInvariantViolation, "singular matrix");
    if (pivot != col) {
      for (int64_t j = 0; j < n; ++j) {
        std::swap(a[col * n + j], a[pivot * n + j]);
        std::swap(inv[col * n + j], inv[pivot * n + j]);
      }
    }
    const double d = a[col * n + col];
    for (int64_t j = 0; j < n; ++j) {
      a[col * n + j] /= d;
      inv[col * n + j] /= d;
    }
    for (int64_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return inv;
}

// Structural liveness of trace[l] given liveness of trace[l+1].
std::vector<uint8_t> LiveInputs(const LayerSpec& l, const Shape& in, const Shape& out,
                                const std::vector<uint8_t>& live_out) {
  std::vector<uint8_t> live(static_cast<size_t>(NumElements(in)), 0);
  switch (l.kind) {
    case LayerKind::kRelu:
    case LayerKind::kFlatten:
      return live_out;
    case LayerKind::kDense:
      for (int64_t o = 0; o < l.out_dim; ++o) {
        if (!live_out[o]) continue;
        for (int64_t i = 0; i < l.in_dim; ++i) {
          if (l.weights[o * l.in_dim + i] != 0.0f) live[i] = 1;
        }
      }
      return live;
    case LayerKind::kGlobalAvgPool: {
      const int64_t plane = in[1] * in[2];
      for (int64_t c = 0; c < in[0]; ++c) {
        if (!live_out[c]) continue;
        std::fill_n(live.begin() + c * plane, plane, 1);
      }
      return live;
    }
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      for (int64_t c = 0; c < out[0]; ++c) {
        for (int64_t y = 0; y < out[1]; ++y) {
          for (int64_t x = 0; x < out[2]; ++x) {
            if (!live_out[(c * out[1] + y) * out[2] + x]) continue;
            for (int64_t i = 0; i < l.kernel.h; ++i) {
              for (int64_t j = 0; j < l.kernel.w; ++j) {
                live[(c * in[1] + y * l.stride.h + i) * in[2] + x * l.stride.w + j] = 1;
              }
            }
          }
        }
      }
      return live;
    case LayerKind::kConv2d:
      for (int64_t o = 0; o < out[0]; ++o) {
        for (int64_t y = 0; y < out[1]; ++y) {
          for (int64_t x = 0; x < out[2]; ++x) {
            if (!live_out[(o * out[1] + y) * out[2] + x]) continue;
            for (int64_t c = 0; c < in[0]; ++c) {
              for (int64_t i = 0; i < l.kernel.h; ++i) {
                const int64_t iy = y * l.stride.h + i - l.padding.h;
                if (iy < 0 || iy >= in[1]) continue;
                for (int64_t j = 0; j < l.kernel.w; ++j) {
                  const int64_t ix = x * l.stride.w + j - l.padding.w;
                  if (ix < 0 || ix >= in[2]) continue;
                  const size_t w = static_cast<size_t>(((o * in[0] + c) * l.kernel.h + i) *
                                                           l.kernel.w + j);
                  if (l.weights[w] != 0.0f) live[(c * in[1] + iy) * in[2] + ix] = 1;
                }
              }
            }
          }
        }
      }
      return live;
  }
  return live;
}

std::vector<uint8_t> LiveUnits(const Model& model, size_t layer, TargetSelector target) {
  model.CheckTarget(target);
  const std::vector<double> seed = TargetSeed(model, target);
  std::vector<uint8_t> live(seed.size());
  for (size_t i = 0; i < seed.size(); ++i) live[i] = seed[i] != 0.0;
  for (size_t l = model.layer_count(); l-- > layer;) {
    live = LiveInputs(model.layers()[l], model.activation_shape(l), model.activation_shape(l + 1),
                      live);
  }
  return live;
}

double MaxAbsAt(const Tensor& t, const std::vector<size_t>& cells) {
  double m = 0.0;
  for (size_t i : cells) m = std::max(m, std::abs(static_cast<double>(t[i])));
  return m;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

Model DenseChain(std::vector<LayerSpec> layers, int64_t in_dim) {
  return Model({in_dim}, std::move(layers));
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

class ReportBuilder {
 public:
  void Check(std::string suite, std::string subject, std::string method, double measured,
             double tolerance, bool ok, std::string detail = {}) {
    report_.entries.push_back({std::move(suite), std::move(subject), std::move(method),
                               ok ? "pass" : "fail", measured, tolerance, std::move(detail)});
  }
  void Exempt(std::string suite, std::string subject, std::string method, double measured,
              std::string detail) {
    report_.entries.push_back({std::move(suite), std::move(subject), std::move(method),
                               "exempt", measured, 0.0, std::move(detail)});
  }
  AxiomReport Take() { return std::move(report_); }

 private:
  AxiomReport report_;
};

bool HasLayer(const Model& model, LayerKind kind) {
  return std::any_of(model.layers().begin(), model.layers().end(),
                     [&](const LayerSpec& l) { return l.kind == kind; });
}

double ScoreOf(const Model& model, const Tensor& x, TargetSelector target) {
  return TargetScore(model, Forward(model, x).features, target);
}

void CompletenessSuite(const Model& model, const Tensor& input, const Tensor& baseline,
                       const PathConfig& path, ReportBuilder& out) {
  std::vector<TargetSelector> targets;
  for (int64_t k = 0; k < model.output_dim(); ++k) targets.push_back(TargetSelector::Feature(k));
  if (model.has_head()) targets.push_back(TargetSelector::Head());
  const std::vector<AttributionMap> ig = IntegratedGradients(model, input, baseline, targets, path);
  const std::vector<AttributionMap> dl = DeepLiftRescale(model, input, baseline, targets);
  const bool has_maxpool = HasLayer(model, LayerKind::kMaxPool2d);
  for (size_t t = 0; t < targets.size(); ++t) {
    const double delta = ScoreOf(model, input, targets[t]) - ScoreOf(model, baseline, targets[t]);
    const std::string subject = targets[t].ToString();
    const std::string d = "delta=" + Num(delta) + " steps=" + std::to_string(path.steps);
    const double ig_tol = std::max(1e-6, 0.01 * std::abs(delta));
    out.Check("completeness", subject, "ig", *ig[t].completeness_gap, ig_tol,
              *ig[t].completeness_gap < ig_tol, d);
    const double dl_tol = 1e-5 * std::max(1.0, std::abs(delta));
    if (has_maxpool) {
      out.Exempt("completeness", subject, "deeplift", *dl[t].completeness_gap,
                 "max-pool routing makes the rule approximate; " + d);
    } else {
      out.Check("completeness", subject, "deeplift", *dl[t].completeness_gap, dl_tol,
                *dl[t].completeness_gap < dl_tol, "delta=" + Num(delta));
    }
  }
  const TargetSelector primary = model.has_head() ? TargetSelector::Head()
                                                  : TargetSelector::Feature(0);
  const double delta = ScoreOf(model, input, primary) - ScoreOf(model, baseline, primary);
  for (size_t l = 1; l <= model.layer_count(); ++l) {
    if (model.layers()[l - 1].kind != LayerKind::kRelu) continue;
    const AttributionMap c = Conductance(model, input, baseline, l, primary, path);
    const double tol = std::max(1e-6, 0.01 * std::abs(delta));
    out.Check("completeness", primary.ToString() + " layer " + std::to_string(l), "conductance",
              *c.completeness_gap, tol, *c.completeness_gap < tol,
              "delta=" + Num(delta) + " steps=" + std::to_string(path.steps));
  }
}

void DeadCheck(const std::string& subject, const Model& model, const Tensor& input,
               const Tensor& baseline, size_t hidden_layer, const PathConfig& path,
               ReportBuilder& out) {
  const TargetSelector target =
      model.has_head() ? TargetSelector::Head() : TargetSelector::Feature(0);
  const std::vector<size_t> dead = StructurallyDeadInputs(model, target);
  const std::string d = std::to_string(dead.size()) + " dead inputs";
  const AttributionMap ig = IntegratedGradients(model, input, baseline, target, path);
  const double m_ig = MaxAbsAt(ig.values, dead);
  out.Check("sensitivity_b", subject, "ig", m_ig, 0.0, m_ig == 0.0, d);
  const AttributionMap dl = DeepLiftRescale(model, input, baseline, target);
  const double m_dl = MaxAbsAt(dl.values, dead);
  out.Check("sensitivity_b", subject, "deeplift", m_dl, 0.0, m_dl == 0.0, d);
  const AttributionMap c0 = Conductance(model, input, baseline, 0, target, path);
  const double m_c0 = MaxAbsAt(c0.values, dead);
  out.Check("sensitivity_b", subject + " layer 0", "conductance", m_c0, 0.0, m_c0 == 0.0, d);
  if (hidden_layer > 0) {
    const std::vector<uint8_t> live = LiveUnits(model, hidden_layer, target);
    std::vector<size_t> dead_units;
    for (size_t i = 0; i < live.size(); ++i) {
      if (!live[i]) dead_units.push_back(i);
    }
    const AttributionMap c = Conductance(model, input, baseline, hidden_layer, target, path);
    const double m_c = MaxAbsAt(c.values, dead_units);
    out.Check("sensitivity_b", subject + " layer " + std::to_string(hidden_layer), "conductance",
              m_c, 0.0, m_c == 0.0, std::to_string(dead_units.size()) + " dead units");
  }
}

void SensitivityASuite(const PathConfig& path, ReportBuilder& out) {
  struct Case {
    std::string name;
    Model model;
    float x;
  };
  const Case cases[] = {{"relu(x) at x=1", ReluFixture(), 1.0f},
                        {"1-relu(1-x) at x=2", ClampedReluFixture(), 2.0f}};
  const TargetSelector t = TargetSelector::Feature(0);
  for (const Case& c : cases) {
    const Tensor x({1}, {c.x});
    const Tensor zero = Tensor::Filled({1}, 0.0f);
    const double delta = ScoreOf(c.model, x, t) - ScoreOf(c.model, zero, t);
    const double grad = BackwardInputGrad(c.model, Forward(c.model, x).trace, t)[0];
    const std::string d = "delta=" + Num(delta) + " gradient=" + Num(grad);
    const double ig = IntegratedGradients(c.model, x, zero, t, path).values[0];
    out.Check("sensitivity_a", c.name, "ig", ig, 0.0, delta == 0.0 || ig != 0.0, d);
    const double dl = DeepLiftRescale(c.model, x, zero, t).values[0];
    out.Check("sensitivity_a", c.name, "deeplift", dl, 0.0, delta == 0.0 || dl != 0.0, d);
  }
}

void InvarianceSuite(const PathConfig& path, uint64_t seed, ReportBuilder& out) {
  const auto [first, second] = MakeEquivalentPair(seed);
  const std::string subject = "equivalent pair seed " + std::to_string(seed);
  const double disc = EquivalenceDiscrepancy(first, second, seed);
  out.Check("invariance", subject, "forward", disc, 1e-5, disc < 1e-5,
            "max output discrepancy over 100 probes");
  Lcg rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const Tensor x(first.input_shape(), UniformVector(rng, first.input_shape()[0], -1.0, 1.0));
  const Tensor zero = Tensor::Filled(first.input_shape(), 0.0f);
  double ig_diff = 0.0, dl_diff = 0.0;
  for (int64_t k = 0; k < first.output_dim(); ++k) {
    const TargetSelector t = TargetSelector::Feature(k);
    ig_diff = std::max(ig_diff, MaxAbsDiff(IntegratedGradients(first, x, zero, t, path).values,
                                           IntegratedGradients(second, x, zero, t, path).values));
    dl_diff = std::max(dl_diff, MaxAbsDiff(DeepLiftRescale(first, x, zero, t).values,
                                           DeepLiftRescale(second, x, zero, t).values));
  }
  out.Check("invariance", subject, "ig", ig_diff, 1e-5, ig_diff < 1e-5, "max-abs map difference");
  out.Exempt("invariance", subject, "deeplift", dl_diff,
             "DeepLIFT is not implementation invariant");
}

void ThresholdSuite(ReportBuilder& out) {
  const Model model = ThresholdFixture();
  const TargetSelector t = TargetSelector::Feature(0);
  const Tensor zero = Tensor::Filled({1}, 0.0f);
  const Tensor above({1}, {1.0f + 1e-6f});
  const Tensor below({1}, {1.0f - 1e-6f});
  const double dl_above = DeepLiftRescale(model, above, zero, t).values[0];
  const double dl_below = DeepLiftRescale(model, below, zero, t).values[0];
  const double g_above = BackwardInputGrad(model, Forward(model, above).trace, t)[0];
  const double g_below = BackwardInputGrad(model, Forward(model, below).trace, t)[0];
  const double jump = std::abs(dl_above - dl_below);
  out.Check("thresholding", "relu(x-1) at 1+-1e-6", "deeplift", jump, 1e-5, jump < 1e-5,
            "attribution " + Num(dl_below) + " -> " + Num(dl_above) + ", gradient " +
                Num(g_below) + " -> " + Num(g_above));
}

void SaturationSuite(const PathConfig& path, ReportBuilder& out) {
  const Model model = SaturationFixture();
  const TargetSelector t = TargetSelector::Feature(0);
  const Tensor x({2}, {1.0f, 1.0f});
  const Tensor zero = Tensor::Filled({2}, 0.0f);
  const Tensor grad = BackwardInputGrad(model, Forward(model, x).trace, t);
  const std::string d = "gradient at input (" + Num(grad[0]) + ", " + Num(grad[1]) + ")";
  const AttributionMap ig = IntegratedGradients(model, x, zero, t, path);
  const double ig_min = std::min(std::abs(ig.values[0]), std::abs(ig.values[1]));
  out.Check("saturation", "relu(1-relu(1-x1-x2)) at (1,1)", "ig", ig_min, 0.0, ig_min > 0.0,
            d + ", gap " + Num(*ig.completeness_gap));
  const AttributionMap dl = DeepLiftRescale(model, x, zero, t);
  const double dl_min = std::min(std::abs(dl.values[0]), std::abs(dl.values[1]));
  out.Check("saturation", "relu(1-relu(1-x1-x2)) at (1,1)", "deeplift", dl_min, 0.0,
            dl_min > 0.0, d + ", gap " + Num(*dl.completeness_gap));
}

}  // namespace

FiniteDiffResult FiniteDiffOracle(const Model& model, std::span<const double> point,
                                  size_t layer, TargetSelector target, double h, int threads) {
  if (!(h > 0.0)) Fail(ErrorCode::kDomain, "finite-difference step must be > 0");
  model.CheckTarget(target);
  const std::vector<std::vector<double>> center = ForwardDouble(model, point, layer);
  FiniteDiffResult result;
  result.gradient.assign(point.size(), 0.0);
  result.near_kink.assign(point.size(), 0);
  ParallelFor(point.size(), threads, [&](size_t i) {
    std::vector<double> probe(point.begin(), point.end());
    probe[i] = point[i] + h;
    const auto plus = ForwardDouble(model, probe, layer);
    probe[i] = point[i] - h;
    const auto minus = ForwardDouble(model, probe, layer);
    const double fp = TargetScoreDouble(model, plus.back(), target);
    const double fm = TargetScoreDouble(model, minus.back(), target);
    result.gradient[i] = (fp - fm) / (2.0 * h);
    result.near_kink[i] = ProbeNearKink(model, layer, center, plus, minus) ? 1 : 0;
  });
  return result;
}

Tensor FiniteDiffGradient(const Model& model, const Tensor& input, TargetSelector target,
                          double h) {
  if (input.shape() != model.input_shape()) {
    Fail(ErrorCode::kShape, "input " + ShapeToString(input.shape()) +
                                " does not match model input " +
                                ShapeToString(model.input_shape()));
  }
  const std::vector<double> point(input.values().begin(), input.values().end());
  return ToTensor(input.shape(), FiniteDiffOracle(model, point, 0, target, h).gradient);
}

GradientComparison CompareGradients(std::span<const double> analytic,
                                    const FiniteDiffResult& oracle, double floor) {
  if (analytic.size() != oracle.gradient.size()) {
    Fail(ErrorCode::kShape, "gradient sizes differ");
  }
  GradientComparison cmp;
  for (size_t i = 0; i < analytic.size(); ++i) {
    if (oracle.near_kink[i]) {
      ++cmp.kink_excluded;
      continue;
    }
    if (std::abs(analytic[i]) <= floor) {
      ++cmp.below_floor;
      continue;
    }
    ++cmp.compared;
    cmp.max_relative_error = std::max(
        cmp.max_relative_error, std::abs(analytic[i] - oracle.gradient[i]) / std::abs(analytic[i]));
  }
  return cmp;
}

AttributionMap LinearOracle(std::span<const float> weights, float bias, const Tensor& input,
                            const Tensor& baseline) {
  CheckSameShape(input, baseline, "linear oracle input vs baseline");
  if (weights.size() != input.size()) {
    Fail(ErrorCode::kShape, "linear oracle has " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(input.size()) + " inputs");
  }
  std::vector<double> v(input.size());
  double f_input = bias, f_baseline = bias;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<double>(weights[i]) *
           (static_cast<double>(input[i]) - static_cast<double>(baseline[i]));
    f_input += static_cast<double>(weights[i]) * input[i];
    f_baseline += static_cast<double>(weights[i]) * baseline[i];
  }
  AttributionMap map;
  map.values = ToTensor(input.shape(), v);
  map.method = Method::kIntegratedGradients;
  map.target = TargetSelector::Feature(0);
  map.baseline_id = ContentHash(baseline);
  map.completeness_gap = std::abs(ReduceSum(map.values) - (f_input - f_baseline));
  return map;
}

std::pair<Model, Model> MakeEquivalentPair(uint64_t seed) {
  constexpr int64_t kIn = 8, kHidden = 6, kOut = 3;
  Lcg rng(seed);
  const std::vector<float> w = UniformVector(rng, kHidden * kIn, -0.8, 0.8);
  const std::vector<float> b = UniformVector(rng, kHidden, -0.1, 0.1);
  const std::vector<float> v = UniformVector(rng, kOut * kHidden, -0.5, 0.5);
  const std::vector<float> c = UniformVector(rng, kOut, -0.1, 0.1);
  std::vector<float> w1 = UniformVector(rng, kIn * kIn, -0.25, 0.25);
  for (int64_t i = 0; i < kIn; ++i) w1[i * kIn + i] = static_cast<float>(rng.Uniform(2.0, 3.0));

  const std::vector<double> w1_inv = Invert(std::vector<double>(w1.begin(), w1.end()), kIn);
  std::vector<float> w2(static_cast<size_t>(kHidden * kIn));
  for (int64_t r = 0; r < kHidden; ++r) {
    for (int64_t j = 0; j < kIn; ++j) {
      double s = 0.0;
      for (int64_t k = 0; k < kIn; ++k) s += static_cast<double>(w[r * kIn + k]) * w1_inv[k * kIn + j];
      w2[r * kIn + j] = static_cast<float>(s);
    }
  }
  Model first = DenseChain({LayerSpec::Dense(kIn, kHidden, w, b), LayerSpec::Relu(),
                            LayerSpec::Dense(kHidden, kOut, v, c)},
                           kIn);
  Model second = DenseChain(
      {LayerSpec::Dense(kIn, kIn, w1, std::vector<float>(kIn, 0.0f)),
       LayerSpec::Dense(kIn, kHidden, w2, b), LayerSpec::Relu(),
       LayerSpec::Dense(kHidden, kOut, v, c)},
      kIn);
  return {std::move(first), std::move(second)};
}

double EquivalenceDiscrepancy(const Model& first, const Model& second, uint64_t seed,
                              int probes) {
  if (first.input_shape() != second.input_shape() || first.output_dim() != second.output_dim()) {
    Fail(ErrorCode::kShape, "models differ in input or output shape");
  }
  Lcg rng(seed + 0x51ED);
  const size_t n = static_cast<size_t>(NumElements(first.input_shape()));
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const Tensor x(first.input_shape(), UniformVector(rng, n, -1.0, 1.0));
    const std::vector<float> a = Forward(first, x).features;
    const std::vector<float> b = Forward(second, x).features;
    for (size_t k = 0; k < a.size(); ++k) {
      worst = std::max(worst, std::abs(static_cast<double>(a[k]) - b[k]));
    }
  }
  return worst;
}

std::vector<size_t> StructurallyDeadInputs(const Model& model, TargetSelector target) {
  const std::vector<uint8_t> live = LiveUnits(model, 0, target);
  std::vector<size_t> dead;
  for (size_t i = 0; i < live.size(); ++i) {
    if (!live[i]) dead.push_back(i);
  }
  return dead;
}

std::vector<DeadInputFixture> DeadInputFixtures(uint64_t seed) {
  Lcg rng(seed);
  std::vector<DeadInputFixture> out;
  {
    std::vector<float> w = SignedUniform(rng, 4 * 6, 0.2, 1.0);
    for (int64_t o = 0; o < 4; ++o) {
      w[o * 6 + 1] = 0.0f;
      w[o * 6 + 4] = 0.0f;
    }
    std::vector<float> v = SignedUniform(rng, 2 * 4, 0.2, 1.0);
    v[0 * 4 + 3] = 0.0f;
    v[1 * 4 + 3] = 0.0f;
    Model model = DenseChain({LayerSpec::Dense(6, 4, std::move(w), UniformVector(rng, 4, 0.1, 0.3)),
                              LayerSpec::Relu(),
                              LayerSpec::Dense(4, 2, std::move(v), UniformVector(rng, 2, -0.1, 0.1))},
                             6);
    Tensor input({6}, UniformVector(rng, 6, 0.2, 1.0));
    out.push_back({"dense with zeroed columns", std::move(model), std::move(input),
                   Tensor::Filled({6}, 0.0f), 2});
  }
  {
    std::vector<float> w = SignedUniform(rng, 3, 0.2, 1.0);
    w[2] = 0.0f;
    Model model({1, 4, 4},
                {LayerSpec::Conv2d(1, 3, {1, 1}, {2, 2}, {0, 0}, std::move(w),
                                   UniformVector(rng, 3, 0.1, 0.3)),
                 LayerSpec::Relu(), LayerSpec::GlobalAvgPool()});
    Tensor input({1, 4, 4}, UniformVector(rng, 16, 0.2, 1.0));
    out.push_back({"1x1 stride-2 convolution", std::move(model), std::move(input),
                   Tensor::Filled({1, 4, 4}, 0.0f), 1});
  }
  return out;
}

Model ReluFixture() {
  return DenseChain({LayerSpec::Dense(1, 1, {1.0f}, {0.0f}), LayerSpec::Relu()}, 1);
}

Model ClampedReluFixture() {
  return DenseChain({LayerSpec::Dense(1, 1, {-1.0f}, {1.0f}), LayerSpec::Relu(),
                     LayerSpec::Dense(1, 1, {-1.0f}, {1.0f})},
                    1);
}

Model ThresholdFixture() {
  return DenseChain({LayerSpec::Dense(1, 1, {1.0f}, {-1.0f}), LayerSpec::Relu()}, 1);
}

Model SaturationFixture() {
  return DenseChain({LayerSpec::Dense(2, 1, {-1.0f, -1.0f}, {1.0f}), LayerSpec::Relu(),
                     LayerSpec::Dense(1, 1, {-1.0f}, {1.0f}), LayerSpec::Relu()},
                    2);
}

bool AxiomReport::passed() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const AxiomEntry& e) { return e.status == "fail"; });
}

std::string AxiomReport::ToJson() const {
  nlohmann::ordered_json doc;
  doc["format"] = "specattr-axiom-report";
  doc["format_version"] = 1;
  doc["passed"] = passed();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const AxiomEntry& e : entries) {
    list.push_back({{"suite", e.suite},
                    {"subject", e.subject},
                    {"method", e.method},
                    {"status", e.status},
                    {"measured", e.measured},
                    {"tolerance", e.tolerance},
                    {"detail", e.detail}});
  }
  doc["entries"] = std::move(list);
  return doc.dump(2) + "\n";
}

AxiomReport RunAxiomReport(const Model& model, const Tensor& input, const Tensor& baseline,
                           const PathConfig& path, uint64_t seed) {
  CheckSameShape(input, baseline, "axiom report input vs baseline");
  PathQuadrature(path);
  ReportBuilder out;
  CompletenessSuite(model, input, baseline, path, out);
  DeadCheck("model", model, input, baseline, 0, path, out);
  for (const DeadInputFixture& f : DeadInputFixtures(seed)) {
    DeadCheck(f.name, f.model, f.input, f.baseline, f.conductance_layer, path, out);
  }
  SensitivityASuite(path, out);
  InvarianceSuite(path, seed, out);
  ThresholdSuite(out);
  SaturationSuite(path, out);
  return out.Take();
}

}  // namespace specattr
