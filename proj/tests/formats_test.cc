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

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "specattr/presets.h"
#include "test_util.h"

namespace specattr {
namespace {

using ::specattr::testing::RandomTensor;
using ::specattr::testing::TempDir;

void PutU32(std::vector<std::byte>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

std::vector<std::byte> SpgBytes(uint32_t h, uint32_t w, const std::vector<float>& values) {
  std::vector<std::byte> out;
  for (char c : std::string("SPG1")) out.push_back(static_cast<std::byte>(c));
  PutU32(out, h);
  PutU32(out, w);
  for (float v : values) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

std::string ZeroCsv(int rows, int cols) {
  std::string s;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) s += c ? ",0" : "0";
    s += "\n";
  }
  return s;
}

TEST(SpectrogramCsvTest, Decode) {
  const Spectrogram s = DecodeSpectrogramCsv(ZeroCsv(48, 4));
  EXPECT_EQ(s.values().shape(), (Shape{1, 48, 4}));
  for (float v : s.values().values()) EXPECT_EQ(v, 0.0f);

  std::string text = ZeroCsv(48, 3);
  text.replace(0, 1, "1.5");
  EXPECT_EQ(DecodeSpectrogramCsv(text).values()[0], 1.5f);

  EXPECT_SPECATTR_ERROR(DecodeSpectrogramCsv(""), ErrorCode::kFormat);
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramCsv(ZeroCsv(47, 4)), ErrorCode::kHeightNot48);
  std::string ragged = ZeroCsv(48, 4);
  ragged.insert(ragged.find('\n'), ",0");
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramCsv(ragged), ErrorCode::kFormat);
  std::string nan = ZeroCsv(48, 2);
  nan.replace(0, 1, "nan");
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramCsv(nan), ErrorCode::kNonFiniteValue);
  std::string junk = ZeroCsv(48, 2);
  junk.replace(0, 1, "abc");
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramCsv(junk), ErrorCode::kFormat);
}

TEST(SpectrogramBinTest, Decode) {
  std::vector<float> values(48 * 1300);
  for (size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i % 97) * 0.25f;
  const Spectrogram s = DecodeSpectrogramBin(SpgBytes(48, 1300, values));
  EXPECT_EQ(s.frames(), 1300);
  EXPECT_EQ(s.values()[48 * 1300 - 1], values.back());
  EXPECT_EQ(s.values()[1301], values[1301]);

  EXPECT_SPECATTR_ERROR(DecodeSpectrogramBin(SpgBytes(48, 10, std::vector<float>(5, 0.0f))),
                        ErrorCode::kFormat);
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramBin(SpgBytes(40, 2, std::vector<float>(80, 0.0f))),
                        ErrorCode::kHeightNot48);
  std::vector<std::byte> bad_magic = SpgBytes(48, 1, std::vector<float>(48, 0.0f));
  bad_magic[3] = std::byte{'2'};
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramBin(bad_magic), ErrorCode::kFormat);
  std::vector<float> inf(48, 0.0f);
  inf[7] = std::numeric_limits<float>::infinity();
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramBin(SpgBytes(48, 1, inf)), ErrorCode::kNonFiniteValue);
  EXPECT_SPECATTR_ERROR(DecodeSpectrogramBin(std::vector<std::byte>(6)), ErrorCode::kFormat);
}

TEST(SpectrogramFileTest, RoundTripBothFormats) {
  TempDir dir;
  const Spectrogram s(RandomTensor({1, 48, 9}, 3, 0, 4));
  for (FileFormat f : {FileFormat::kCsv, FileFormat::kBin}) {
    const auto path = dir / (f == FileFormat::kCsv ? "s.csv" : "s.bin");
    WriteSpectrogram(s, path, f);
    EXPECT_EQ(FileFormatFromPath(path), f);
    const Spectrogram back = ReadSpectrogram(path, f);
    EXPECT_TRUE(back.values().BitwiseEquals(s.values()));
    EXPECT_EQ(back.source_id(), path.filename().string());
  }
  EXPECT_EQ(EncodeSpectrogramBin(s), SpgBytes(48, 9, std::vector<float>(s.values().values().begin(),
                                                                         s.values().values().end())));
  EXPECT_SPECATTR_ERROR(ReadSpectrogram(dir / "missing.bin", FileFormat::kBin), ErrorCode::kIo);
}

TEST(AttributionFormatTest, RoundTripIsBitExact) {
  AttributionMap m;
  m.values = RandomTensor({1, 48, 15}, 5, -1, 1);
  m.method = Method::kConductance;
  m.target = TargetSelector::Head();
  m.baseline_id = "abc123";
  m.completeness_gap = 3.0517578125e-05;
  m.layer = 3;
  const AttributionMap back = DecodeAttribution(EncodeAttribution(m));
  EXPECT_TRUE(back.values.BitwiseEquals(m.values));
  EXPECT_EQ(back.method, m.method);
  EXPECT_EQ(back.target, m.target);
  EXPECT_EQ(back.baseline_id, m.baseline_id);
  EXPECT_EQ(back.completeness_gap, m.completeness_gap);
  EXPECT_EQ(back.layer, m.layer);

  TempDir dir;
  WriteAttribution(m, dir / "m.att.bin", FileFormat::kBin);
  EXPECT_TRUE(ReadAttribution(dir / "m.att.bin").values.BitwiseEquals(m.values));
}

TEST(AttributionFormatTest, HeaderAndTrailer) {
  const Model lin = MakeLinearFixture();
  const AttributionMap ig = IntegratedGradients(lin, Tensor({2}, {1, 1}), Tensor({2}, {0, 0}),
                                                TargetSelector::Feature(0));
  EXPECT_EQ(*ig.completeness_gap, 0.0);
  const std::vector<std::byte> bytes = EncodeAttribution(ig);
  ASSERT_GT(bytes.size(), 20u);
  EXPECT_EQ(std::memcmp(bytes.data(), "ATT1", 4), 0);
  EXPECT_EQ(static_cast<uint8_t>(bytes[4]), 1);  // height
  EXPECT_EQ(static_cast<uint8_t>(bytes[8]), 2);  // width
  const std::string trailer(reinterpret_cast<const char*>(bytes.data()) + 20, bytes.size() - 20);
  EXPECT_NE(trailer.find("method=ig\n"), std::string::npos);
  EXPECT_NE(trailer.find("target=feature:0\n"), std::string::npos);
  EXPECT_NE(trailer.find("completeness-gap=0\n"), std::string::npos);
  EXPECT_NE(trailer.find("baseline-id="), std::string::npos);

  std::vector<std::byte> no_meta(bytes.begin(), bytes.begin() + 20);
  EXPECT_SPECATTR_ERROR(DecodeAttribution(no_meta), ErrorCode::kFormat);
  std::vector<std::byte> short_payload(bytes.begin(), bytes.begin() + 14);
  EXPECT_SPECATTR_ERROR(DecodeAttribution(short_payload), ErrorCode::kFormat);
}

TEST(AttributionFormatTest, Csv) {
  AttributionMap m;
  m.values = Tensor({2, 2}, {1.5f, -2.0f, 0.25f, 0.0f});
  EXPECT_EQ(AttributionCsv(m), "1.5,-2\n0.25,0\n");
}

TEST(HeatmapTest, ZeroMapIsWhite) {
  AttributionMap m;
  m.values = Tensor::Filled({1, 48, 5}, 0.0f);
  const RgbImage img = RenderHeatmapImage(m);
  EXPECT_EQ(img.width, 5);
  EXPECT_EQ(img.height, 48);
  for (uint8_t b : img.rgb) EXPECT_EQ(b, 255);
}

TEST(HeatmapTest, AnchorsAndFlip) {
  AttributionMap m;
  std::vector<float> v(3 * 2, 0.0f);
  v[0] = 4.0f;   // row 0, col 0: lowest frequency
  v[5] = -2.0f;  // row 2, col 1
  m.values = Tensor({1, 3, 2}, v);
  const RgbImage img = RenderHeatmapImage(m);
  auto px = [&](int64_t row, int64_t col) {
    const size_t i = static_cast<size_t>((row * img.width + col) * 3);
    return std::vector<int>{img.rgb[i], img.rgb[i + 1], img.rgb[i + 2]};
  };
  EXPECT_EQ(px(2, 0), (std::vector<int>{255, 0, 0}));
  EXPECT_EQ(px(0, 1), (std::vector<int>{128, 128, 255}));
  EXPECT_EQ(px(1, 0), (std::vector<int>{255, 255, 255}));

  const std::vector<std::byte> ppm = EncodePpm(img);
  const std::string head = "P6\n2 3\n255\n";
  ASSERT_EQ(ppm.size(), head.size() + 18);
  EXPECT_EQ(std::string(reinterpret_cast<const char*>(ppm.data()), head.size()), head);
}

TEST(HeatmapTest, NegationSwapsRedAndBlue) {
  AttributionMap m;
  m.values = RandomTensor({1, 48, 15}, 6, -1, 1);
  AttributionMap n = m;
  std::vector<float> neg(m.values.values().begin(), m.values.values().end());
  for (float& x : neg) x = -x;
  n.values = Tensor(m.values.shape(), neg);
  const RgbImage a = RenderHeatmapImage(m), b = RenderHeatmapImage(n);
  ASSERT_EQ(a.rgb.size(), b.rgb.size());
  for (size_t i = 0; i < a.rgb.size(); i += 3) {
    EXPECT_EQ(a.rgb[i], b.rgb[i + 2]);
    EXPECT_EQ(a.rgb[i + 1], b.rgb[i + 1]);
    EXPECT_EQ(a.rgb[i + 2], b.rgb[i]);
  }
}

TEST(FileFormatTest, Names) {
  EXPECT_EQ(ParseFileFormat("csv"), FileFormat::kCsv);
  EXPECT_EQ(ParseFileFormat("bin"), FileFormat::kBin);
  EXPECT_SPECATTR_ERROR(ParseFileFormat("png"), ErrorCode::kDomain);
}

}  // namespace
}  // namespace specattr
