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

#include "specattr/model_io.h"

#include <cmath>
#include <utility>

#include "byte_io.h"
#include "json.hpp"
#include "specattr/error.h"

namespace specattr {
namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "specattr-model";

Extent2d ParseExtent(const json& j, const char* key, Extent2d fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    Fail(ErrorCode::kFormat, std::string("'") + key + "' must be a [h, w] pair");
  }
  return {v[0].get<int64_t>(), v[1].get<int64_t>()};
}

json ExtentJson(const Extent2d& e) { return json::array({e.h, e.w}); }

// Reads `count` floats at `offset` bytes, advancing `cursor`.
std::vector<float> TakeFloats(std::span<const std::byte> blob, size_t& cursor,
                              size_t count, const std::string& label) {
  if (cursor + count * 4 > blob.size()) {
    Fail(ErrorCode::kWeightCountMismatch,
         label + " needs " + std::to_string(count * 4) + " bytes at offset " +
             std::to_string(cursor) + " but the blob has " + std::to_string(blob.size()));
  }
  std::vector<float> out(count);
  for (size_t i = 0; i < count; ++i) {
    out[i] = internal::ReadF32(blob, cursor + 4 * i);
    if (!std::isfinite(out[i])) Fail(ErrorCode::kNonFiniteWeight, label + " has a non-finite weight");
  }
  cursor += count * 4;
  return out;
}

LayerSpec ParseLayer(const json& j, std::span<const std::byte> blob, size_t& cursor,
                     const std::string& label) {
  if (!j.is_object() || !j.contains("kind")) {
    Fail(ErrorCode::kFormat, label + " must be an object with a 'kind'");
  }
  LayerSpec l;
  l.kind = ParseLayerKind(j.at("kind").get<std::string>());
  switch (l.kind) {
    case LayerKind::kConv2d:
      l.in_channels = j.at("in_channels").get<int64_t>();
      l.out_channels = j.at("out_channels").get<int64_t>();
      l.kernel = ParseExtent(j, "kernel", {0, 0});
      l.stride = ParseExtent(j, "stride", {1, 1});
      l.padding = ParseExtent(j, "padding", {0, 0});
      break;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      l.kernel = ParseExtent(j, "window", {0, 0});
      l.stride = ParseExtent(j, "stride", l.kernel);
      break;
    case LayerKind::kDense:
      l.in_dim = j.at("in_dim").get<int64_t>();
      l.out_dim = j.at("out_dim").get<int64_t>();
      break;
    default:
      break;
  }
  if (l.has_weights()) {
    if (l.in_channels < 0 || l.out_channels < 0 || l.kernel.h < 0 || l.kernel.w < 0 ||
        l.in_dim < 0 || l.out_dim < 0) {
      Fail(ErrorCode::kShape, label + " has negative hyperparameters");
    }
    const auto offset = j.at("weight_offset").get<int64_t>();
    if (offset < 0 || static_cast<size_t>(offset) != cursor) {
      Fail(ErrorCode::kWeightCountMismatch,
           label + " weight_offset " + std::to_string(offset) + " but weights must start at " +
               std::to_string(cursor));
    }
    const size_t total = l.DeclaredParameterCount();
    const size_t bias_count =
        static_cast<size_t>(l.kind == LayerKind::kConv2d ? l.out_channels : l.out_dim);
    l.weights = TakeFloats(blob, cursor, total - bias_count, label);
    l.bias = TakeFloats(blob, cursor, bias_count, label);
  }
  return l;
}

json LayerJson(const LayerSpec& l, size_t& cursor) {
  json j;
  j["kind"] = std::string(LayerKindName(l.kind));
  switch (l.kind) {
    case LayerKind::kConv2d:
      j["in_channels"] = l.in_channels;
      j["out_channels"] = l.out_channels;
      j["kernel"] = ExtentJson(l.kernel);
      j["stride"] = ExtentJson(l.stride);
      j["padding"] = ExtentJson(l.padding);
      break;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      j["window"] = ExtentJson(l.kernel);
      j["stride"] = ExtentJson(l.stride);
      break;
    case LayerKind::kDense:
      j["in_dim"] = l.in_dim;
      j["out_dim"] = l.out_dim;
      break;
    default:
      break;
  }
  if (l.has_weights()) {
    j["weight_offset"] = cursor;
    cursor += 4 * (l.weights.size() + l.bias.size());
  }
  return j;
}

void AppendLayerWeights(std::vector<std::byte>& blob, const LayerSpec& l) {
  for (float w : l.weights) internal::AppendF32(blob, w);
  for (float b : l.bias) internal::AppendF32(blob, b);
}

}  // namespace

Model LoadModel(std::string_view manifest, std::span<const std::byte> blob) {
  json doc;
  try {
    doc = json::parse(manifest);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) Fail(ErrorCode::kFormat, "manifest must be a JSON object");
    if (doc.contains("format") && doc.at("format").get<std::string>() != kFormatName) {
      Fail(ErrorCode::kFormat, "unexpected manifest format '" +
                                   doc.at("format").get<std::string>() + "'");
    }
    if (!doc.contains("format_version")) Fail(ErrorCode::kFormat, "missing format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      Fail(ErrorCode::kFormat, "unsupported format_version " + std::to_string(version));
    }
    std::optional<uint64_t> seed;
    if (doc.contains("seed") && !doc.at("seed").is_null()) seed = doc.at("seed").get<uint64_t>();
    const Shape input_shape = doc.at("input_shape").get<Shape>();
    if (doc.contains("weight_bytes") &&
        doc.at("weight_bytes").get<uint64_t>() != blob.size()) {
      Fail(ErrorCode::kWeightCountMismatch,
           "manifest declares " + std::to_string(doc.at("weight_bytes").get<uint64_t>()) +
               " weight bytes, blob has " + std::to_string(blob.size()));
    }
    size_t cursor = 0;
    std::vector<LayerSpec> layers;
    const json& layer_list = doc.at("layers");
    if (!layer_list.is_array()) Fail(ErrorCode::kFormat, "'layers' must be an array");
    for (size_t i = 0; i < layer_list.size(); ++i) {
      layers.push_back(ParseLayer(layer_list[i], blob, cursor, "layer " + std::to_string(i)));
    }
    std::optional<LayerSpec> head;
    if (doc.contains("head") && !doc.at("head").is_null()) {
      head = ParseLayer(doc.at("head"), blob, cursor, "head");
    }
    if (cursor != blob.size()) {
      Fail(ErrorCode::kWeightCountMismatch,
           "layers consume " + std::to_string(cursor) + " bytes but the blob has " +
               std::to_string(blob.size()));
    }
    return Model(input_shape, std::move(layers), std::move(head), seed);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("malformed manifest: ") + e.what());
  }
}

SerializedModel SerializeModel(const Model& model, const std::string& weights_file) {
  SerializedModel out;
  size_t cursor = 0;
  json doc;
  doc["format"] = std::string(kFormatName);
  doc["format_version"] = kModelFormatVersion;
  if (model.seed()) doc["seed"] = *model.seed();
  doc["input_shape"] = model.input_shape();
  doc["weights_file"] = weights_file;
  json layers = json::array();
  for (const LayerSpec& l : model.layers()) {
    layers.push_back(LayerJson(l, cursor));
    AppendLayerWeights(out.blob, l);
  }
  doc["layers"] = std::move(layers);
  if (model.has_head()) {
    doc["head"] = LayerJson(model.head(), cursor);
    AppendLayerWeights(out.blob, model.head());
  }
  doc["weight_bytes"] = cursor;
  out.manifest = doc.dump(2) + "\n";
  return out;
}

Model LoadModelFile(const std::filesystem::path& manifest_path) {
  const std::vector<std::byte> manifest_bytes = internal::ReadFileBytes(manifest_path);
  const std::string manifest(reinterpret_cast<const char*>(manifest_bytes.data()),
                             manifest_bytes.size());
  std::string weights_file;
  try {
    const json doc = json::parse(manifest);
    weights_file = doc.at("weights_file").get<std::string>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, manifest_path.string() + ": " + e.what());
  }
  const std::vector<std::byte> blob =
      internal::ReadFileBytes(manifest_path.parent_path() / weights_file);
  return LoadModel(manifest, blob);
}

void SaveModelFile(const Model& model, const std::filesystem::path& manifest_path) {
  const std::string weights_name = manifest_path.stem().string() + ".weights.bin";
  const SerializedModel s = SerializeModel(model, weights_name);
  internal::WriteFileBytes(manifest_path.parent_path() / weights_name, s.blob);
  internal::WriteFileText(manifest_path, s.manifest);
}

}  // namespace specattr
