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

#include "specattr/formats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

#include "byte_io.h"
#include "specattr/error.h"
#include "specattr/presets.h"

namespace specattr {
namespace {

using internal::AppendF32;
using internal::AppendText;
using internal::AppendU32;
using internal::ReadF32;
using internal::ReadU32;

constexpr size_t kHeaderBytes = 12;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

float ParseFloat(std::string_view field, size_t row) {
  field = Trim(field);
  float v = 0.0f;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    Fail(ErrorCode::kFormat, "bad number '" + std::string(field) + "' on row " +
                                 std::to_string(row));
  }
  if (!std::isfinite(v)) {
    Fail(ErrorCode::kNonFiniteValue, "non-finite value on row " + std::to_string(row));
  }
  return v;
}

std::string FormatFloat(float v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatDouble(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Header {
  uint32_t height;
  uint32_t width;
};

Header ReadHeader(std::span<const std::byte> bytes, std::string_view magic) {
  if (bytes.size() < kHeaderBytes) Fail(ErrorCode::kFormat, "file shorter than its header");
  for (size_t i = 0; i < 4; ++i) {
    if (static_cast<char>(bytes[i]) != magic[i]) {
      Fail(ErrorCode::kFormat, "unknown magic, expected " + std::string(magic));
    }
  }
  return {ReadU32(bytes, 4), ReadU32(bytes, 8)};
}

std::vector<float> ReadFloats(std::span<const std::byte> bytes, size_t count) {
  std::vector<float> v(count);
  for (size_t i = 0; i < count; ++i) {
    v[i] = ReadF32(bytes, kHeaderBytes + 4 * i);
    if (!std::isfinite(v[i])) {
      Fail(ErrorCode::kNonFiniteValue, "non-finite value at index " + std::to_string(i));
    }
  }
  return v;
}

// [height, width] view of any shape.
std::pair<int64_t, int64_t> FlatView(const Shape& shape) {
  const int64_t width = shape.back();
  return {NumElements(shape) / width, width};
}

std::string ShapeText(const Shape& shape) {
  std::string s;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

Shape ParseShapeText(std::string_view text) {
  Shape shape;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('x', start);
    if (end == std::string_view::npos) end = text.size();
    int64_t d = 0;
    const std::string_view part = text.substr(start, end - start);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (ec != std::errc() || ptr != part.data() + part.size() || d < 1) {
      Fail(ErrorCode::kFormat, "bad shape '" + std::string(text) + "'");
    }
    shape.push_back(d);
    start = end + 1;
  }
  return shape;
}

uint8_t Fade(double s) {
  return static_cast<uint8_t>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(s)))));
}

}  // namespace

FileFormat ParseFileFormat(std::string_view name) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "bin") return FileFormat::kBin;
  Fail(ErrorCode::kDomain, "unknown file format '" + std::string(name) + "'");
}

FileFormat FileFormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::kCsv : FileFormat::kBin;
}

Spectrogram DecodeSpectrogramCsv(std::string_view text, std::string source_id) {
  const std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty()) Fail(ErrorCode::kFormat, "empty spectrogram csv");
  if (static_cast<int64_t>(lines.size()) != kSpectrogramHeight) {
    Fail(ErrorCode::kHeightNot48, "csv has " + std::to_string(lines.size()) + " rows");
  }
  std::vector<float> values;
  size_t width = 0;
  for (size_t r = 0; r < lines.size(); ++r) {
    size_t fields = 0, start = 0;
    const std::string_view line = lines[r];
    while (true) {
      size_t end = line.find(',', start);
      if (end == std::string_view::npos) end = line.size();
      values.push_back(ParseFloat(line.substr(start, end - start), r));
      ++fields;
      if (end == line.size()) break;
      start = end + 1;
    }
    if (r == 0) width = fields;
    if (fields != width) {
      Fail(ErrorCode::kFormat, "row " + std::to_string(r) + " has " + std::to_string(fields) +
                                   " columns, expected " + std::to_string(width));
    }
  }
  return Spectrogram(
      Tensor({1, kSpectrogramHeight, static_cast<int64_t>(width)}, std::move(values)),
      std::move(source_id));
}

Spectrogram DecodeSpectrogramBin(std::span<const std::byte> bytes, std::string source_id) {
  const Header h = ReadHeader(bytes, "SPG1");
  if (h.width == 0) Fail(ErrorCode::kFormat, "spectrogram width is 0");
  const size_t count = static_cast<size_t>(h.height) * h.width;
  if (bytes.size() != kHeaderBytes + 4 * count) {
    Fail(ErrorCode::kFormat, "SPG1 payload is " + std::to_string(bytes.size() - kHeaderBytes) +
                                 " bytes, header declares " + std::to_string(4 * count));
  }
  if (h.height != kSpectrogramHeight) {
    Fail(ErrorCode::kHeightNot48, "spectrogram height is " + std::to_string(h.height));
  }
  return Spectrogram(Tensor({1, kSpectrogramHeight, static_cast<int64_t>(h.width)},
                            ReadFloats(bytes, count)),
                     std::move(source_id));
}

std::string EncodeSpectrogramCsv(const Spectrogram& spec) {
  const int64_t t = spec.frames();
  const auto v = spec.values().values();
  std::string out;
  for (int64_t r = 0; r < kSpectrogramHeight; ++r) {
    for (int64_t c = 0; c < t; ++c) {
      if (c > 0) out += ',';
      out += FormatFloat(v[r * t + c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::byte> EncodeSpectrogramBin(const Spectrogram& spec) {
  std::vector<std::byte> out;
  AppendText(out, "SPG1");
  AppendU32(out, static_cast<uint32_t>(kSpectrogramHeight));
  AppendU32(out, static_cast<uint32_t>(spec.frames()));
  for (float v : spec.values().values()) AppendF32(out, v);
  return out;
}

Spectrogram ReadSpectrogram(const std::filesystem::path& path, FileFormat format) {
  const std::vector<std::byte> bytes = internal::ReadFileBytes(path);
  if (format == FileFormat::kBin) return DecodeSpectrogramBin(bytes, path.filename().string());
  const std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return DecodeSpectrogramCsv(text, path.filename().string());
}

void WriteSpectrogram(const Spectrogram& spec, const std::filesystem::path& path,
                      FileFormat format) {
  if (format == FileFormat::kBin) {
    internal::WriteFileBytes(path, EncodeSpectrogramBin(spec));
  } else {
    internal::WriteFileText(path, EncodeSpectrogramCsv(spec));
  }
}

std::vector<std::byte> EncodeAttribution(const AttributionMap& map) {
  const auto [height, width] = FlatView(map.values.shape());
  std::vector<std::byte> out;
  AppendText(out, "ATT1");
  AppendU32(out, static_cast<uint32_t>(height));
  AppendU32(out, static_cast<uint32_t>(width));
  for (float v : map.values.values()) AppendF32(out, v);
  std::string meta;
  meta += "method=" + std::string(MethodName(map.method)) + "\n";
  meta += "target=" + map.target.ToString() + "\n";
  if (map.baseline_id) meta += "baseline-id=" + *map.baseline_id + "\n";
  if (map.completeness_gap) meta += "completeness-gap=" + FormatDouble(*map.completeness_gap) + "\n";
  if (map.layer) meta += "layer=" + std::to_string(*map.layer) + "\n";
  meta += "shape=" + ShapeText(map.values.shape()) + "\n";
  AppendText(out, meta);
  return out;
}

AttributionMap DecodeAttribution(std::span<const std::byte> bytes) {
  const Header h = ReadHeader(bytes, "ATT1");
  const size_t count = static_cast<size_t>(h.height) * h.width;
  if (count == 0) Fail(ErrorCode::kFormat, "empty attribution map");
  if (bytes.size() < kHeaderBytes + 4 * count) {
    Fail(ErrorCode::kFormat, "ATT1 payload shorter than its header declares");
  }
  std::vector<float> values = ReadFloats(bytes, count);
  const auto tail = bytes.subspan(kHeaderBytes + 4 * count);
  const std::string meta(reinterpret_cast<const char*>(tail.data()), tail.size());

  AttributionMap map;
  Shape shape{static_cast<int64_t>(h.height), static_cast<int64_t>(h.width)};
  bool have_method = false, have_target = false;
  for (std::string_view line : SplitLines(meta)) {
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorCode::kFormat, "bad metadata line '" + std::string(line) + "'");
    }
    const std::string_view key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "method") {
        map.method = ParseMethod(value);
        have_method = true;
      } else if (key == "target") {
        map.target = TargetSelector::Parse(value);
        have_target = true;
      } else if (key == "baseline-id") {
        map.baseline_id = std::string(value);
      } else if (key == "completeness-gap") {
        double gap = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), gap);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
          Fail(ErrorCode::kFormat, "bad completeness-gap '" + std::string(value) + "'");
        }
        map.completeness_gap = gap;
      } else if (key == "layer") {
        size_t layer = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), layer);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
          Fail(ErrorCode::kFormat, "bad layer '" + std::string(value) + "'");
        }
        map.layer = layer;
      } else if (key == "shape") {
        shape = ParseShapeText(value);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFormat) throw;
      Fail(ErrorCode::kFormat, e.what());
    }
  }
  if (!have_method || !have_target) Fail(ErrorCode::kFormat, "ATT1 trailer lacks method/target");
  if (NumElements(shape) != static_cast<int64_t>(count) ||
      shape.back() != static_cast<int64_t>(h.width)) {
    Fail(ErrorCode::kFormat, "ATT1 shape " + ShapeText(shape) + " disagrees with header");
  }
  map.values = Tensor(std::move(shape), std::move(values));
  return map;
}

std::string AttributionCsv(const AttributionMap& map) {
  const auto [height, width] = FlatView(map.values.shape());
  const auto v = map.values.values();
  std::string out;
  for (int64_t r = 0; r < height; ++r) {
    for (int64_t c = 0; c < width; ++c) {
      if (c > 0) out += ',';
      out += FormatFloat(v[r * width + c]);
    }
    out += '\n';
  }
  return out;
}

void WriteAttribution(const AttributionMap& map, const std::filesystem::path& path,
                      FileFormat format) {
  if (format == FileFormat::kBin) {
    internal::WriteFileBytes(path, EncodeAttribution(map));
  } else {
    internal::WriteFileText(path, AttributionCsv(map));
  }
}

AttributionMap ReadAttribution(const std::filesystem::path& path) {
  return DecodeAttribution(internal::ReadFileBytes(path));
}

RgbImage RenderHeatmapImage(const AttributionMap& map) {
  const Shape& shape = map.values.shape();
  const int64_t width = shape.back();
  const int64_t rows = shape.size() >= 2 ? shape[shape.size() - 2] : 1;
  const int64_t planes = NumElements(shape) / (rows * width);
  const auto v = map.values.values();
  double max_abs = 0.0;
  for (float x : v) max_abs = std::max(max_abs, std::abs(static_cast<double>(x)));

  RgbImage img;
  img.width = width;
  img.height = planes * rows;
  img.rgb.assign(static_cast<size_t>(img.width * img.height * 3), 255);
  for (int64_t p = 0; p < planes; ++p) {
    for (int64_t r = 0; r < rows; ++r) {
      const int64_t out_row = p * rows + (rows - 1 - r);
      for (int64_t c = 0; c < width; ++c) {
        const double value = v[(p * rows + r) * width + c];
        if (max_abs == 0.0 || value == 0.0) continue;
        const double s = value / max_abs;
        uint8_t* px = &img.rgb[static_cast<size_t>((out_row * width + c) * 3)];
        const uint8_t f = Fade(s);
        if (s > 0.0) {
          px[0] = 255;
          px[1] = f;
          px[2] = f;
        } else {
          px[0] = f;
          px[1] = f;
          px[2] = 255;
        }
      }
    }
  }
  return img;
}

std::vector<std::byte> EncodePpm(const RgbImage& image) {
  std::vector<std::byte> out;
  AppendText(out, "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n");
  for (uint8_t b : image.rgb) out.push_back(static_cast<std::byte>(b));
  return out;
}

void RenderHeatmap(const AttributionMap& map, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, EncodePpm(RenderHeatmapImage(map)));
}

}  // namespace specattr
