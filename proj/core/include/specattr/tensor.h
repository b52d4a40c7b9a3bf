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

#ifndef SPECATTR_TENSOR_H_
#define SPECATTR_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace specattr {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major float tensor. Every element is finite and
// NumElements(shape()) == size() always holds; constructors enforce both.
// There is no broadcasting anywhere in the library.
class Tensor {
 public:
  // A single zero; lets Tensor live in resizable containers.
  Tensor();
  Tensor(Shape shape, std::vector<float> values);

  // Throws ShapeError on an empty shape or a non-positive dimension.
  static Tensor Filled(const Shape& shape, float fill);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const { return shape_.at(axis); }
  size_t size() const { return values_.size(); }

  std::span<const float> values() const { return values_; }
  // Callers writing through this view must keep values finite.
  std::span<float> mutable_values() { return values_; }

  float operator[](size_t i) const { return values_[i]; }

  // Shape and bit pattern equality (distinguishes 0.0 from -0.0).
  bool BitwiseEquals(const Tensor& other) const;

 private:
  Shape shape_;
  std::vector<float> values_;
};

// Throws ShapeError unless a and b have identical shapes.
void CheckSameShape(const Tensor& a, const Tensor& b, const char* context);

// baseline + alpha * (x - baseline), evaluated as (1-alpha)*baseline +
// alpha*x in double so that alpha=0 and alpha=1 reproduce the endpoints
// bitwise.
Tensor PathPoint(const Tensor& x, const Tensor& baseline, double alpha);

// Sum in flat index order with a double accumulator.
double ReduceSum(const Tensor& t);

// Elementwise a - b.
Tensor Subtract(const Tensor& a, const Tensor& b);

// 64-bit FNV-1a over shape and raw element bytes, as 16 hex digits.
std::string ContentHash(const Tensor& t);

}  // namespace specattr

#endif  // SPECATTR_TENSOR_H_
