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

#ifndef SPECATTR_MODEL_IO_H_
#define SPECATTR_MODEL_IO_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specattr/net.h"

namespace specattr {

inline constexpr int kModelFormatVersion = 1;

// Manifest: a JSON object
//   {
//     "format": "specattr-model", "format_version": 1, "seed": <optional>,
//     "input_shape": [1, 48, 15],
//     "weights_file": "<blob path relative to the manifest>",
//     "weight_bytes": <blob length>,
//     "layers": [ {"kind": "conv2d", "in_channels": 1, "out_channels": 8,
//                  "kernel": [3, 3], "stride": [1, 1], "padding": [1, 1],
//                  "weight_offset": 0}, {"kind": "relu"},
//                 {"kind": "avgpool2d", "window": [2, 2], "stride": [2, 2]},
//                 {"kind": "dense", "in_dim": 20, "out_dim": 1,
//                  "weight_offset": 2304}, ... ],
//     "head": <optional dense layer entry>
//   }
// Blob: little-endian float32. Each weighted layer (then the head) stores its
// weight tensor followed by its bias at `weight_offset` bytes; offsets must be
// contiguous in manifest order and cover the blob exactly.
//
// Throws FormatError, UnknownLayerKind, ShapeError, WeightCountMismatch,
// NonFiniteWeight.
Model LoadModel(std::string_view manifest, std::span<const std::byte> blob);

struct SerializedModel {
  std::string manifest;
  std::vector<std::byte> blob;
};

SerializedModel SerializeModel(const Model& model, const std::string& weights_file);

// The blob is resolved relative to the manifest's directory.
Model LoadModelFile(const std::filesystem::path& manifest_path);

// Writes the manifest and "<stem>.weights.bin" next to it.
void SaveModelFile(const Model& model, const std::filesystem::path& manifest_path);

}  // namespace specattr

#endif  // SPECATTR_MODEL_IO_H_
