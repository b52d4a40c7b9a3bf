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

#ifndef SPECATTR_PRESETS_H_
#define SPECATTR_PRESETS_H_

#include <cstdint>

#include "specattr/net.h"

namespace specattr {

// Spectrogram height the whole toolkit is built around.
inline constexpr int64_t kSpectrogramHeight = 48;
// Feature channels of the demo CNN.
inline constexpr int64_t kDemoFeatureCount = 20;

struct NisqaLikeOptions {
  int64_t segment_width = 15;
  bool with_head = true;
};

// Demo stand-in for a NISQA-style CNN feature extractor:
//   conv(1->8,3x3,pad 1) relu avgpool 2x2
//   conv(8->16,3x3,pad 1) relu avgpool 2x2
//   conv(16->20,3x3,pad 1) relu globalavgpool
// plus an optional dense 20->1 head. Weights are drawn from Lcg(seed), so a
// seed fully determines the model.
Model MakeNisqaLikeModel(uint64_t seed, const NisqaLikeOptions& options = {});

// f(x) = 2*x0 + 3*x1 on a [2] input, as a single dense 2->1 layer.
Model MakeLinearFixture();

// Dense linear fixture with the given weights and bias on an input of shape
// [weights.size()].
Model MakeLinearModel(const std::vector<float>& weights, float bias);

// Copy of `model` with a dense FxF layer appended after the features. The
// layer is the identity except that feature `dst` is replaced by
// sign * feature `src` (sign = +1 clones, sign = -1 negates). The head, if
// any, is kept.
Model WithMirroredFeature(const Model& model, int64_t src, int64_t dst, float sign);

}  // namespace specattr

#endif  // SPECATTR_PRESETS_H_
