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

#ifndef SPECATTR_RNG_H_
#define SPECATTR_RNG_H_

#include <cstdint>

namespace specattr {

// 64-bit linear congruential generator (Knuth's MMIX constants). Used for
// every seeded fixture so models and inputs are identical on all platforms;
// <random> distributions are implementation-defined and are avoided.
class Lcg {
 public:
  explicit Lcg(uint64_t seed) : state_(seed ^ 0x5DEECE66DULL) { NextU32(); }

  uint32_t NextU32() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<uint32_t>(state_ >> 32);
  }

  // Uniform in [0, 1) with 24 bits of resolution, so the value is exactly
  // representable as a float.
  double Uniform() { return static_cast<double>(NextU32() >> 8) * 0x1p-24; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  uint32_t Below(uint32_t n) {
    return static_cast<uint32_t>((static_cast<uint64_t>(NextU32()) * n) >> 32);
  }

 private:
  uint64_t state_;
};

}  // namespace specattr

#endif  // SPECATTR_RNG_H_
