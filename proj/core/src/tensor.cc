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

#include "specattr/tensor.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <utility>

#include "specattr/error.h"

namespace specattr {

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void CheckShapeValid(const Shape& shape) {
  if (shape.empty()) Fail(ErrorCode::kShape, "shape must have at least one dimension");
  for (int64_t d : shape) {
    if (d < 1) Fail(ErrorCode::kShape, "non-positive dimension in " + ShapeToString(shape));
  }
}

}  // namespace

Tensor::Tensor() : shape_{1}, values_(1, 0.0f) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  CheckShapeValid(shape_);
  if (NumElements(shape_) != static_cast<int64_t>(values_.size())) {
    Fail(ErrorCode::kShape, "shape " + ShapeToString(shape_) + " needs " +
                                std::to_string(NumElements(shape_)) +
                                " values, got " + std::to_string(values_.size()));
  }
  for (float v : values_) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNonFiniteValue, "tensor element is not finite");
  }
}

Tensor Tensor::Filled(const Shape& shape, float fill) {
  CheckShapeValid(shape);
  return Tensor(shape, std::vector<float>(NumElements(shape), fill));
}

bool Tensor::BitwiseEquals(const Tensor& other) const {
  return shape_ == other.shape_ &&
         std::memcmp(values_.data(), other.values_.data(),
                     values_.size() * sizeof(float)) == 0;
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* context) {
  if (a.shape() != b.shape()) {
    Fail(ErrorCode::kShape, std::string(context) + ": shape " +
                                ShapeToString(a.shape()) + " vs " +
                                ShapeToString(b.shape()));
  }
}

Tensor PathPoint(const Tensor& x, const Tensor& baseline, double alpha) {
  CheckSameShape(x, baseline, "PathPoint");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    Fail(ErrorCode::kDomain, "alpha must lie in [0,1], got " + std::to_string(alpha));
  }
  const auto xs = x.values();
  const auto bs = baseline.values();
  std::vector<float> out(xs.size());
  const double beta = 1.0 - alpha;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(beta * bs[i] + alpha * xs[i]);
  }
  return Tensor(x.shape(), std::move(out));
}

double ReduceSum(const Tensor& t) {
  double sum = 0.0;
  for (float v : t.values()) sum += v;
  return sum;
}

Tensor Subtract(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "Subtract");
  std::vector<float> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor(a.shape(), std::move(out));
}

std::string ContentHash(const Tensor& t) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (int64_t d : t.shape()) mix(&d, sizeof(d));
  mix(t.values().data(), t.size() * sizeof(float));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace specattr
