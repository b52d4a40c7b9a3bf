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

#ifndef SPECATTR_FORMATS_H_
#define SPECATTR_FORMATS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specattr/attrib.h"
#include "specattr/pipeline.h"

namespace specattr {

// SPG1: "SPG1", u32 height, u32 width, height*width float32 row-major, all
// little-endian.
// ATT1: "ATT1", u32 height, u32 width, float32 values, then a text trailer of
// key=value lines (method, target, baseline-id, completeness-gap, layer,
// shape). height is the product of all but the last dimension.
enum class FileFormat { kCsv, kBin };

// "csv" or "bin"; throws DomainError.
FileFormat ParseFileFormat(std::string_view name);
// ".csv" selects csv, anything else bin.
FileFormat FileFormatFromPath(const std::filesystem::path& path);

// Throw FormatError, HeightNot48, NonFiniteValue (and DomainError for
// negative magnitudes).
Spectrogram DecodeSpectrogramCsv(std::string_view text, std::string source_id = {});
Spectrogram DecodeSpectrogramBin(std::span<const std::byte> bytes, std::string source_id = {});
std::string EncodeSpectrogramCsv(const Spectrogram& spec);
std::vector<std::byte> EncodeSpectrogramBin(const Spectrogram& spec);

Spectrogram ReadSpectrogram(const std::filesystem::path& path, FileFormat format);
void WriteSpectrogram(const Spectrogram& spec, const std::filesystem::path& path,
                      FileFormat format);

std::vector<std::byte> EncodeAttribution(const AttributionMap& map);
// Throws FormatError, NonFiniteValue.
AttributionMap DecodeAttribution(std::span<const std::byte> bytes);
// One line per row of the [height x width] view, comma-separated.
std::string AttributionCsv(const AttributionMap& map);

// Throws IoError.
void WriteAttribution(const AttributionMap& map, const std::filesystem::path& path,
                      FileFormat format);
AttributionMap ReadAttribution(const std::filesystem::path& path);

struct RgbImage {
  int64_t width = 0;
  int64_t height = 0;
  std::vector<uint8_t> rgb;
};

// Diverging ramp blue (-max|v|) -> white (0) -> red (+max|v|). Each channel
// plane is flipped so its highest row comes first; planes are stacked in
// channel order.
RgbImage RenderHeatmapImage(const AttributionMap& map);
std::vector<std::byte> EncodePpm(const RgbImage& image);
void RenderHeatmap(const AttributionMap& map, const std::filesystem::path& path);

}  // namespace specattr

#endif  // SPECATTR_FORMATS_H_
