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

#include "specattr/net.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <memory>
#include <utility>

#include "specattr/error.h"

namespace specattr {

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d:
      return "conv2d";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kMaxPool2d:
      return "maxpool2d";
    case LayerKind::kAvgPool2d:
      return "avgpool2d";
    case LayerKind::kGlobalAvgPool:
      return "globalavgpool";
    case LayerKind::kFlatten:
      return "flatten";
    case LayerKind::kDense:
      return "dense";
  }
  return "unknown";
}

LayerKind ParseLayerKind(std::string_view name) {
  for (LayerKind kind :
       {LayerKind::kConv2d, LayerKind::kRelu, LayerKind::kMaxPool2d,
        LayerKind::kAvgPool2d, LayerKind::kGlobalAvgPool, LayerKind::kFlatten,
        LayerKind::kDense}) {
    if (LayerKindName(kind) == name) return kind;
  }
  Fail(ErrorCode::kUnknownLayerKind, "unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::Conv2d(int64_t in_channels, int64_t out_channels,
                            Extent2d kernel, Extent2d stride, Extent2d padding,
                            std::vector<float> weights,
                            std::vector<float> bias) {
  LayerSpec s;
  s.kind = LayerKind::kConv2d;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  s.weights = std::move(weights);
  s.bias = std::move(bias);
  return s;
}

LayerSpec LayerSpec::Relu() { return LayerSpec{}; }

LayerSpec LayerSpec::MaxPool2d(Extent2d window, Extent2d stride) {
  LayerSpec s;
  s.kind = LayerKind::kMaxPool2d;
  s.kernel = window;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::AvgPool2d(Extent2d window, Extent2d stride) {
  LayerSpec s = MaxPool2d(window, stride);
  s.kind = LayerKind::kAvgPool2d;
  return s;
}

LayerSpec LayerSpec::GlobalAvgPool() {
  LayerSpec s;
  s.kind = LayerKind::kGlobalAvgPool;
  return s;
}

LayerSpec LayerSpec::Flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::Dense(int64_t in_dim, int64_t out_dim,
                           std::vector<float> weights,
                           std::vector<float> bias) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in_dim = in_dim;
  s.out_dim = out_dim;
  s.weights = std::move(weights);
  s.bias = std::move(bias);
  return s;
}

size_t LayerSpec::DeclaredParameterCount() const {
  switch (kind) {
    case LayerKind::kConv2d:
      return static_cast<size_t>(out_channels * in_channels * kernel.h * kernel.w +
                                 out_channels);
    case LayerKind::kDense:
      return static_cast<size_t>(out_dim * in_dim + out_dim);
    default:
      return 0;
  }
}

TargetSelector TargetSelector::Parse(std::string_view text) {
  if (text == "head") return Head();
  constexpr std::string_view kPrefix = "feature:";
  if (text.starts_with(kPrefix)) {
    const std::string_view digits = text.substr(kPrefix.size());
    int64_t k = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 0) {
      return Feature(k);
    }
  }
  Fail(ErrorCode::kDomain, "target must be 'head' or 'feature:K', got '" +
                               std::string(text) + "'");
}

std::string TargetSelector::ToString() const {
  return is_head() ? "head" : "feature:" + std::to_string(feature_);
}

namespace {

int64_t PooledExtent(int64_t in, int64_t window, int64_t stride, int64_t pad) {
  const int64_t span = in + 2 * pad - window;
  if (span < 0) return 0;
  return span / stride + 1;
}

std::string LayerLabel(size_t index, const LayerSpec& layer) {
  return "layer " + std::to_string(index) + " (" +
         std::string(LayerKindName(layer.kind)) + ")";
}

// Output shape of `layer` applied to `in`, or ShapeError.
Shape PlanLayer(size_t index, const LayerSpec& layer, const Shape& in) {
  const std::string label = LayerLabel(index, layer);
  auto require_rank3 = [&] {
    if (in.size() != 3) {
      Fail(ErrorCode::kShape, label + " needs a [C,H,W] input, got " + ShapeToString(in));
    }
  };
  auto check_window = [&](const Extent2d& k, const Extent2d& s, const Extent2d& p) {
    if (k.h < 1 || k.w < 1 || s.h < 1 || s.w < 1 || p.h < 0 || p.w < 0) {
      Fail(ErrorCode::kShape, label + " has a non-positive kernel/stride or negative padding");
    }
    const int64_t ho = PooledExtent(in[1], k.h, s.h, p.h);
    const int64_t wo = PooledExtent(in[2], k.w, s.w, p.w);
    if (ho < 1 || wo < 1) {
      Fail(ErrorCode::kShape, label + " window does not fit input " + ShapeToString(in));
    }
    return std::pair{ho, wo};
  };
  auto check_params = [&](size_t expected_w, size_t expected_b) {
    if (layer.weights.size() != expected_w || layer.bias.size() != expected_b) {
      Fail(ErrorCode::kShape, label + " declares " + std::to_string(expected_w) +
                                  "+" + std::to_string(expected_b) +
                                  " parameters but carries " +
                                  std::to_string(layer.weights.size()) + "+" +
                                  std::to_string(layer.bias.size()));
    }
    for (float v : layer.weights) {
      if (!std::isfinite(v)) Fail(ErrorCode::kNonFiniteWeight, label + " has a non-finite weight");
    }
    for (float v : layer.bias) {
      if (!std::isfinite(v)) Fail(ErrorCode::kNonFiniteWeight, label + " has a non-finite bias");
    }
  };

  switch (layer.kind) {
    case LayerKind::kConv2d: {
      require_rank3();
      if (layer.in_channels < 1 || layer.out_channels < 1) {
        Fail(ErrorCode::kShape, label + " needs positive channel counts");
      }
      if (in[0] != layer.in_channels) {
        Fail(ErrorCode::kShape, label + " expects " + std::to_string(layer.in_channels) +
                                    " input channels, got " + ShapeToString(in));
      }
      auto [ho, wo] = check_window(layer.kernel, layer.stride, layer.padding);
      check_params(static_cast<size_t>(layer.out_channels * layer.in_channels *
                                       layer.kernel.h * layer.kernel.w),
                   static_cast<size_t>(layer.out_channels));
      return {layer.out_channels, ho, wo};
    }
    case LayerKind::kRelu:
      return in;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d: {
      require_rank3();
      auto [ho, wo] = check_window(layer.kernel, layer.stride, Extent2d{0, 0});
      return {in[0], ho, wo};
    }
    case LayerKind::kGlobalAvgPool:
      require_rank3();
      return {in[0]};
    case LayerKind::kFlatten:
      return {NumElements(in)};
    case LayerKind::kDense:
      if (layer.in_dim < 1 || layer.out_dim < 1) {
        Fail(ErrorCode::kShape, label + " needs positive dimensions");
      }
      if (NumElements(in) != layer.in_dim) {
        Fail(ErrorCode::kShape, label + " expects " + std::to_string(layer.in_dim) +
                                    " inputs, got " + ShapeToString(in));
      }
      check_params(static_cast<size_t>(layer.out_dim * layer.in_dim),
                   static_cast<size_t>(layer.out_dim));
      return {layer.out_dim};
  }
  Fail(ErrorCode::kUnknownLayerKind, label);
}

// Hot elementwise kernels, cloned for AVX2 with runtime dispatch. FMA is not
// enabled, so every clone performs the same IEEE operations and results are
// bitwise identical across CPUs.
#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define SPECATTR_HOT_KERNEL __attribute__((target_clones("avx2", "default")))
#else
#define SPECATTR_HOT_KERNEL
#endif

typedef double V4d __attribute__((vector_size(32)));

// Unaligned 4-wide double load and store.
#define SPECATTR_LOAD4(dst, src) std::memcpy(&(dst), (src), sizeof(V4d))
#define SPECATTR_STORE4(dst, src) std::memcpy((dst), &(src), sizeof(V4d))

// c[i][j] (+)= sum_k a(i, k) * b[k][j] with a(i, k) = a[i * a_row + k * a_col],
// b row-major k x n, c row-major m x n. Every c[i][j] is summed in ascending
// k regardless of blocking. Without `accumulate`, c is overwritten.
SPECATTR_HOT_KERNEL
void GemmAcc(int64_t m, int64_t n, int64_t k, const float* __restrict a, int64_t a_row,
             int64_t a_col, const double* __restrict b, double* __restrict c,
             bool accumulate = true) {
  constexpr int64_t kMr = 4, kNr = 8;
  int64_t i0 = 0;
  for (; i0 + kMr <= m; i0 += kMr) {
    int64_t j0 = 0;
    for (; j0 + kNr <= n; j0 += kNr) {
      V4d acc[kMr][2];
      for (int64_t i = 0; i < kMr; ++i) {
        if (accumulate) {
          SPECATTR_LOAD4(acc[i][0], c + (i0 + i) * n + j0);
          SPECATTR_LOAD4(acc[i][1], c + (i0 + i) * n + j0 + 4);
        } else {
          acc[i][0] = V4d{0.0, 0.0, 0.0, 0.0};
          acc[i][1] = acc[i][0];
        }
      }
      const float* a0 = a + i0 * a_row;
      for (int64_t kk = 0; kk < k; ++kk) {
        V4d b0;
        SPECATTR_LOAD4(b0, b + kk * n + j0);
        V4d b1;
        SPECATTR_LOAD4(b1, b + kk * n + j0 + 4);
        const float* ak = a0 + kk * a_col;
        for (int64_t i = 0; i < kMr; ++i) {
          const double av = ak[i * a_row];
          acc[i][0] += av * b0;
          acc[i][1] += av * b1;
        }
      }
      for (int64_t i = 0; i < kMr; ++i) {
        SPECATTR_STORE4(c + (i0 + i) * n + j0, acc[i][0]);
        SPECATTR_STORE4(c + (i0 + i) * n + j0 + 4, acc[i][1]);
      }
    }
    for (int64_t i = i0; i < i0 + kMr; ++i) {
      for (int64_t j = j0; j < n; ++j) {
        double sum = accumulate ? c[i * n + j] : 0.0;
        for (int64_t kk = 0; kk < k; ++kk) sum += a[i * a_row + kk * a_col] * b[kk * n + j];
        c[i * n + j] = sum;
      }
    }
  }
  for (int64_t i = i0; i < m; ++i) {
    double* ci = c + i * n;
    if (!accumulate) std::fill_n(ci, n, 0.0);
    for (int64_t kk = 0; kk < k; ++kk) {
      const double av = a[i * a_row + kk * a_col];
      const double* bp = b + kk * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// dst = in > 0 ? g : 0
SPECATTR_HOT_KERNEL
void ReluGrad(double* __restrict dst, const double* __restrict g,
              const float* __restrict in, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] = in[i] > 0.0f ? g[i] : 0.0;
}

// Range of output coordinates o with 0 <= o*stride + offset < extent.
struct ValidRange {
  int64_t lo;
  int64_t hi;  // exclusive
};

ValidRange Valid(int64_t out_extent, int64_t stride, int64_t offset, int64_t extent) {
  int64_t lo = 0;
  if (offset < 0) lo = (-offset + stride - 1) / stride;
  int64_t hi = out_extent;
  // Largest o with o*stride + offset <= extent - 1.
  const int64_t limit = extent - 1 - offset;
  if (limit < 0) {
    hi = 0;
  } else {
    hi = std::min(hi, limit / stride + 1);
  }
  return {lo, std::max(lo, hi)};
}

// Column buffer of a convolution: one row per (c, ki, kj) kernel tap, one
// column per output position, zero where the tap reads padding.
template <typename T>
void Im2Col(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
            std::span<const T> in, std::vector<double>& cols) {
  const int64_t c_in = in_shape[0], h_in = in_shape[1], w_in = in_shape[2];
  const int64_t h_out = out_shape[1], w_out = out_shape[2];
  const int64_t positions = h_out * w_out;
  cols.assign(static_cast<size_t>(c_in * l.kernel.h * l.kernel.w * positions), 0.0);
  int64_t r = 0;
  for (int64_t c = 0; c < c_in; ++c) {
    const T* src = in.data() + c * h_in * w_in;
    for (int64_t ki = 0; ki < l.kernel.h; ++ki) {
      const ValidRange ys = Valid(h_out, l.stride.h, ki - l.padding.h, h_in);
      for (int64_t kj = 0; kj < l.kernel.w; ++kj, ++r) {
        const ValidRange xs = Valid(w_out, l.stride.w, kj - l.padding.w, w_in);
        double* row = cols.data() + r * positions;
        for (int64_t y = ys.lo; y < ys.hi; ++y) {
          const int64_t base = (y * l.stride.h + ki - l.padding.h) * w_in + (kj - l.padding.w);
          for (int64_t x = xs.lo; x < xs.hi; ++x) {
            row[y * w_out + x] = static_cast<double>(src[base + x * l.stride.w]);
          }
        }
      }
    }
  }
}

template <typename T>
void ApplyConv2d(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
                 std::span<const T> in, std::span<T> out) {
  const int64_t positions = out_shape[1] * out_shape[2];
  const int64_t taps = in_shape[0] * l.kernel.h * l.kernel.w;
  std::vector<double> cols;
  Im2Col(l, in_shape, out_shape, in, cols);
  std::vector<double> acc(static_cast<size_t>(l.out_channels * positions));
  for (int64_t o = 0; o < l.out_channels; ++o) {
    std::fill_n(acc.begin() + o * positions, positions, static_cast<double>(l.bias[o]));
  }
  GemmAcc(l.out_channels, positions, taps, l.weights.data(), taps, 1, cols.data(), acc.data());
  for (size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
}

template <typename T>
void ApplyPool(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
               std::span<const T> in, std::span<T> out) {
  const int64_t channels = in_shape[0], h_in = in_shape[1], w_in = in_shape[2];
  const int64_t h_out = out_shape[1], w_out = out_shape[2];
  const double inv_area = 1.0 / static_cast<double>(l.kernel.h * l.kernel.w);
  for (int64_t c = 0; c < channels; ++c) {
    const T* src = in.data() + c * h_in * w_in;
    for (int64_t y = 0; y < h_out; ++y) {
      for (int64_t x = 0; x < w_out; ++x) {
        const T* window = src + y * l.stride.h * w_in + x * l.stride.w;
        T& dst = out[(c * h_out + y) * w_out + x];
        if (l.kind == LayerKind::kMaxPool2d) {
          T best = window[0];
          for (int64_t i = 0; i < l.kernel.h; ++i) {
            for (int64_t j = 0; j < l.kernel.w; ++j) best = std::max(best, window[i * w_in + j]);
          }
          dst = best;
        } else {
          double sum = 0.0;
          for (int64_t i = 0; i < l.kernel.h; ++i) {
            for (int64_t j = 0; j < l.kernel.w; ++j) sum += window[i * w_in + j];
          }
          dst = static_cast<T>(sum * inv_area);
        }
      }
    }
  }
}

template <typename T>
void ApplyLayer(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
                std::span<const T> in, std::span<T> out) {
  switch (l.kind) {
    case LayerKind::kConv2d:
      ApplyConv2d(l, in_shape, out_shape, in, out);
      return;
    case LayerKind::kRelu:
      for (size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
      return;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      ApplyPool(l, in_shape, out_shape, in, out);
      return;
    case LayerKind::kGlobalAvgPool: {
      const int64_t plane = in_shape[1] * in_shape[2];
      for (int64_t c = 0; c < in_shape[0]; ++c) {
        double sum = 0.0;
        for (int64_t i = 0; i < plane; ++i) sum += in[c * plane + i];
        out[c] = static_cast<T>(sum / static_cast<double>(plane));
      }
      return;
    }
    case LayerKind::kFlatten:
      std::copy(in.begin(), in.end(), out.begin());
      return;
    case LayerKind::kDense:
      for (int64_t o = 0; o < l.out_dim; ++o) {
        const float* w = l.weights.data() + o * l.in_dim;
        double sum = l.bias[o];
        for (int64_t i = 0; i < l.in_dim; ++i) sum += static_cast<double>(w[i]) * in[i];
        out[o] = static_cast<T>(sum);
      }
      return;
  }
}

// First row-major argmax of a pooling window, as a flat index into the
// channel plane.
template <typename T>
int64_t WindowArgmax(const T* plane, int64_t w_in, int64_t y0, int64_t x0,
                     const Extent2d& window) {
  int64_t best = y0 * w_in + x0;
  for (int64_t i = 0; i < window.h; ++i) {
    for (int64_t j = 0; j < window.w; ++j) {
      const int64_t idx = (y0 + i) * w_in + x0 + j;
      if (plane[idx] > plane[best]) best = idx;
    }
  }
  return best;
}

void BackpropConv2d(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
                    std::span<const double> grad_out, std::span<double> grad_in) {
  const int64_t c_in = in_shape[0], h_in = in_shape[1], w_in = in_shape[2];
  const int64_t h_out = out_shape[1], w_out = out_shape[2];
  const int64_t positions = h_out * w_out;
  const int64_t taps = c_in * l.kernel.h * l.kernel.w;
  // Output channels with an all-zero adjoint.
  std::vector<int64_t> active;
  for (int64_t o = 0; o < l.out_channels; ++o) {
    const double* g = grad_out.data() + o * positions;
    if (!std::all_of(g, g + positions, [](double v) { return v == 0.0; })) active.push_back(o);
  }
  if (active.empty()) return;
  // dcols = W^T * dY; fully written by GemmAcc, so left uninitialised.
  std::unique_ptr<double[]> dcols(new double[static_cast<size_t>(taps * positions)]);
  if (active.size() == static_cast<size_t>(l.out_channels)) {
    GemmAcc(taps, positions, l.out_channels, l.weights.data(), 1, taps, grad_out.data(),
            dcols.get(), false);
  } else {
    // Gather the live channels so the product skips the rest.
    const int64_t n_active = static_cast<int64_t>(active.size());
    std::vector<float> w(static_cast<size_t>(taps * n_active));
    std::vector<double> g(static_cast<size_t>(n_active * positions));
    for (int64_t j = 0; j < n_active; ++j) {
      const int64_t o = active[j];
      for (int64_t r = 0; r < taps; ++r) w[r * n_active + j] = l.weights[o * taps + r];
      std::copy_n(grad_out.data() + o * positions, positions, g.data() + j * positions);
    }
    GemmAcc(taps, positions, n_active, w.data(), n_active, 1, g.data(), dcols.get(), false);
  }
  // Scatter the columns back onto the input plane.
  int64_t r = 0;
  for (int64_t c = 0; c < c_in; ++c) {
    double* plane = grad_in.data() + c * h_in * w_in;
    for (int64_t ki = 0; ki < l.kernel.h; ++ki) {
      const ValidRange ys = Valid(h_out, l.stride.h, ki - l.padding.h, h_in);
      for (int64_t kj = 0; kj < l.kernel.w; ++kj, ++r) {
        const ValidRange xs = Valid(w_out, l.stride.w, kj - l.padding.w, w_in);
        const double* row = dcols.get() + r * positions;
        for (int64_t y = ys.lo; y < ys.hi; ++y) {
          const int64_t base = (y * l.stride.h + ki - l.padding.h) * w_in + (kj - l.padding.w);
          for (int64_t x = xs.lo; x < xs.hi; ++x) {
            plane[base + x * l.stride.w] += row[y * w_out + x];
          }
        }
      }
    }
  }
}

// Layers that write every element of grad_in instead of accumulating.
bool OverwritesGradient(LayerKind kind) {
  return kind == LayerKind::kRelu || kind == LayerKind::kGlobalAvgPool ||
         kind == LayerKind::kFlatten;
}

// grad_in must be zero-initialised by the caller unless
// OverwritesGradient(l.kind).
void BackpropLayer(const LayerSpec& l, const Shape& in_shape, const Shape& out_shape,
                   std::span<const float> in, std::span<const float> out,
                   const ActivationTrace* ref, size_t index, double epsilon,
                   std::span<const double> grad_out, std::span<double> grad_in) {
  switch (l.kind) {
    case LayerKind::kConv2d:
      BackpropConv2d(l, in_shape, out_shape, grad_out, grad_in);
      return;
    case LayerKind::kRelu:
      if (ref == nullptr) {
        ReluGrad(grad_in.data(), grad_out.data(), in.data(), static_cast<int64_t>(in.size()));
      } else {
        const auto ref_in = ref->activations[index].values();
        const auto ref_out = ref->activations[index + 1].values();
        for (size_t i = 0; i < in.size(); ++i) {
          const double d_in = static_cast<double>(in[i]) - ref_in[i];
          double m;
          if (std::abs(d_in) >= epsilon) {
            m = (static_cast<double>(out[i]) - ref_out[i]) / d_in;
          } else {
            m = in[i] > 0.0f ? 1.0 : 0.0;
          }
          grad_in[i] = grad_out[i] * m;
        }
      }
      return;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d: {
      const int64_t channels = in_shape[0], h_in = in_shape[1], w_in = in_shape[2];
      const int64_t h_out = out_shape[1], w_out = out_shape[2];
      const double inv_area = 1.0 / static_cast<double>(l.kernel.h * l.kernel.w);
      for (int64_t c = 0; c < channels; ++c) {
        const float* plane = in.data() + c * h_in * w_in;
        double* dst = grad_in.data() + c * h_in * w_in;
        for (int64_t y = 0; y < h_out; ++y) {
          for (int64_t x = 0; x < w_out; ++x) {
            const int64_t o = (c * h_out + y) * w_out + x;
            const double g = grad_out[o];
            if (g == 0.0) continue;
            const int64_t y0 = y * l.stride.h, x0 = x * l.stride.w;
            if (l.kind == LayerKind::kAvgPool2d) {
              for (int64_t i = 0; i < l.kernel.h; ++i) {
                for (int64_t j = 0; j < l.kernel.w; ++j) {
                  dst[(y0 + i) * w_in + x0 + j] += g * inv_area;
                }
              }
              continue;
            }
            const int64_t a = WindowArgmax(plane, w_in, y0, x0, l.kernel);
            double m = 1.0;
            if (ref != nullptr) {
              const float ref_in = ref->activations[index].values()[c * h_in * w_in + a];
              const float ref_out = ref->activations[index + 1].values()[o];
              const double d_in = static_cast<double>(plane[a]) - ref_in;
              if (std::abs(d_in) >= epsilon) {
                m = (static_cast<double>(out[o]) - ref_out) / d_in;
              }
            }
            dst[a] += g * m;
          }
        }
      }
      return;
    }
    case LayerKind::kGlobalAvgPool: {
      const int64_t plane = in_shape[1] * in_shape[2];
      const double inv = 1.0 / static_cast<double>(plane);
      for (int64_t c = 0; c < in_shape[0]; ++c) {
        const double g = grad_out[c] * inv;
        for (int64_t i = 0; i < plane; ++i) grad_in[c * plane + i] = g;
      }
      return;
    }
    case LayerKind::kFlatten:
      std::copy(grad_out.begin(), grad_out.end(), grad_in.begin());
      return;
    case LayerKind::kDense:
      for (int64_t o = 0; o < l.out_dim; ++o) {
        const double g = grad_out[o];
        if (g == 0.0) continue;
        const float* w = l.weights.data() + o * l.in_dim;
        for (int64_t i = 0; i < l.in_dim; ++i) grad_in[i] += g * w[i];
      }
      return;
  }
}

void CheckTrace(const Model& model, const ActivationTrace& trace) {
  if (trace.activations.size() != model.layer_count() + 1) {
    Fail(ErrorCode::kShape, "trace has " + std::to_string(trace.activations.size()) +
                                " entries, model needs " +
                                std::to_string(model.layer_count() + 1));
  }
  for (size_t i = 0; i < trace.activations.size(); ++i) {
    if (trace.activations[i].shape() != model.activation_shape(i)) {
      Fail(ErrorCode::kShape, "trace entry " + std::to_string(i) +
                                  " does not match the model's shape plan");
    }
  }
}

}  // namespace

Model::Model(Shape input_shape, std::vector<LayerSpec> layers,
             std::optional<LayerSpec> head, std::optional<uint64_t> seed)
    : input_shape_(std::move(input_shape)),
      layers_(std::move(layers)),
      head_(std::move(head)),
      seed_(seed) {
  if (input_shape_.empty()) Fail(ErrorCode::kShape, "model input shape is empty");
  for (int64_t d : input_shape_) {
    if (d < 1) Fail(ErrorCode::kShape, "model input shape has a non-positive dimension");
  }
  plan_.push_back(input_shape_);
  for (size_t i = 0; i < layers_.size(); ++i) {
    plan_.push_back(PlanLayer(i, layers_[i], plan_.back()));
  }
  if (plan_.back().size() != 1) {
    Fail(ErrorCode::kShape, "final feature layer must produce a vector, got " +
                                ShapeToString(plan_.back()));
  }
  if (head_) {
    if (head_->kind != LayerKind::kDense || head_->out_dim != 1) {
      Fail(ErrorCode::kShape, "head must be a dense layer with a single output");
    }
    PlanLayer(layers_.size(), *head_, plan_.back());
  }
}

void Model::CheckTarget(TargetSelector target) const {
  if (target.is_head()) {
    if (!has_head()) Fail(ErrorCode::kTargetOutOfRange, "model has no head");
    return;
  }
  if (target.feature() >= output_dim()) {
    Fail(ErrorCode::kTargetOutOfRange, "feature " + std::to_string(target.feature()) +
                                           " outside [0," + std::to_string(output_dim()) + ")");
  }
}

ForwardResult Forward(const Model& model, const Tensor& input) {
  if (input.shape() != model.input_shape()) {
    Fail(ErrorCode::kShape, "input " + ShapeToString(input.shape()) +
                                " does not match model input " +
                                ShapeToString(model.input_shape()));
  }
  ForwardResult result;
  result.trace.activations.reserve(model.layer_count() + 1);
  result.trace.activations.push_back(input);
  for (size_t i = 0; i < model.layer_count(); ++i) {
    const Shape& out_shape = model.activation_shape(i + 1);
    std::vector<float> out(NumElements(out_shape));
    ApplyLayer<float>(model.layers()[i], model.activation_shape(i), out_shape,
                      result.trace.activations.back().values(), out);
    result.trace.activations.emplace_back(out_shape, std::move(out));
  }
  const auto features = result.trace.output().values();
  result.features.assign(features.begin(), features.end());
  return result;
}

double TargetScore(const Model& model, std::span<const float> features,
                   TargetSelector target) {
  model.CheckTarget(target);
  if (!target.is_head()) return features[target.feature()];
  const LayerSpec& head = model.head();
  double sum = head.bias[0];
  for (int64_t i = 0; i < head.in_dim; ++i) {
    sum += static_cast<double>(head.weights[i]) * features[i];
  }
  return sum;
}

std::vector<std::vector<double>> ForwardDouble(const Model& model,
                                               std::span<const double> input,
                                               size_t from_layer) {
  if (from_layer > model.layer_count()) {
    Fail(ErrorCode::kLayerOutOfRange, "layer " + std::to_string(from_layer) + " outside [0," +
                                          std::to_string(model.layer_count()) + "]");
  }
  const Shape& in_shape = model.activation_shape(from_layer);
  if (static_cast<int64_t>(input.size()) != NumElements(in_shape)) {
    Fail(ErrorCode::kShape, "input size does not match activation " + ShapeToString(in_shape));
  }
  std::vector<std::vector<double>> acts(model.layer_count() + 1);
  acts[from_layer].assign(input.begin(), input.end());
  for (size_t i = from_layer; i < model.layer_count(); ++i) {
    const Shape& out_shape = model.activation_shape(i + 1);
    acts[i + 1].resize(NumElements(out_shape));
    ApplyLayer<double>(model.layers()[i], model.activation_shape(i), out_shape, acts[i],
                       acts[i + 1]);
  }
  return acts;
}

double TargetScoreDouble(const Model& model, std::span<const double> features,
                         TargetSelector target) {
  model.CheckTarget(target);
  if (!target.is_head()) return features[target.feature()];
  const LayerSpec& head = model.head();
  double sum = head.bias[0];
  for (int64_t i = 0; i < head.in_dim; ++i) {
    sum += static_cast<double>(head.weights[i]) * features[i];
  }
  return sum;
}

std::vector<double> TargetSeed(const Model& model, TargetSelector target) {
  model.CheckTarget(target);
  std::vector<double> seed(model.output_dim(), 0.0);
  if (target.is_head()) {
    for (int64_t i = 0; i < model.output_dim(); ++i) seed[i] = model.head().weights[i];
  } else {
    seed[target.feature()] = 1.0;
  }
  return seed;
}

std::vector<double> Backpropagate(const Model& model, const ActivationTrace& trace,
                                  size_t to_layer, std::vector<double> seed,
                                  const RescaleReference* rescale) {
  CheckTrace(model, trace);
  if (rescale != nullptr) CheckTrace(model, *rescale->trace);
  if (to_layer > model.layer_count()) {
    Fail(ErrorCode::kLayerOutOfRange, "layer " + std::to_string(to_layer) +
                                          " outside [0," +
                                          std::to_string(model.layer_count()) + "]");
  }
  if (static_cast<int64_t>(seed.size()) != model.output_dim()) {
    Fail(ErrorCode::kShape, "seed length does not match the feature count");
  }
  std::vector<double> grad = std::move(seed);
  std::vector<double> next;
  for (size_t i = model.layer_count(); i-- > to_layer;) {
    const Shape& in_shape = model.activation_shape(i);
    const LayerSpec& layer = model.layers()[i];
    if (OverwritesGradient(layer.kind)) {
      next.resize(NumElements(in_shape));
    } else {
      next.assign(NumElements(in_shape), 0.0);
    }
    BackpropLayer(layer, in_shape, model.activation_shape(i + 1),
                  trace.activations[i].values(), trace.activations[i + 1].values(),
                  rescale ? rescale->trace : nullptr, i,
                  rescale ? rescale->epsilon : 0.0, grad, next);
    grad.swap(next);
  }
  return grad;
}

Tensor ToTensor(const Shape& shape, std::span<const double> values) {
  std::vector<float> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(values[i]);
    if (!std::isfinite(out[i])) {
      Fail(ErrorCode::kInvariantViolation, "non-finite value while rounding to float");
    }
  }
  return Tensor(shape, std::move(out));
}

Tensor BackwardInputGrad(const Model& model, const ActivationTrace& trace,
                         TargetSelector target) {
  return BackwardFromLayer(model, trace, 0, target);
}

Tensor BackwardFromLayer(const Model& model, const ActivationTrace& trace,
                         size_t layer, TargetSelector target) {
  if (layer > model.layer_count()) {
    Fail(ErrorCode::kLayerOutOfRange, "layer " + std::to_string(layer) + " outside [0," +
                                          std::to_string(model.layer_count()) + "]");
  }
  const std::vector<double> grad =
      Backpropagate(model, trace, layer, TargetSeed(model, target));
  return ToTensor(model.activation_shape(layer), grad);
}

}  // namespace specattr
