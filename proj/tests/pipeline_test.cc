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

#include "specattr/pipeline.h"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "specattr/presets.h"
#include "test_util.h"

namespace specattr {
namespace {

using ::specattr::testing::RandomTensor;

Spectrogram RandomSpec(int64_t frames, uint64_t seed) {
  return Spectrogram(RandomTensor({1, 48, frames}, seed));
}

AttributionMap MapOf(Tensor values, TargetSelector t = TargetSelector::Feature(0)) {
  AttributionMap m;
  m.values = std::move(values);
  m.target = t;
  return m;
}

TEST(SpectrogramTest, Validation) {
  EXPECT_EQ(Spectrogram(Tensor::Filled({48, 7}, 0.0f)).values().shape(), (Shape{1, 48, 7}));
  EXPECT_SPECATTR_ERROR(Spectrogram(Tensor::Filled({1, 47, 7}, 0.0f)), ErrorCode::kHeightNot48);
  EXPECT_SPECATTR_ERROR(Spectrogram(Tensor::Filled({2, 48, 7}, 0.0f)), ErrorCode::kShape);
  EXPECT_SPECATTR_ERROR(Spectrogram(Tensor::Filled({48}, 0.0f)), ErrorCode::kShape);
  EXPECT_SPECATTR_ERROR(Spectrogram(Tensor::Filled({1, 48, 3}, -0.5f)), ErrorCode::kDomain);
}

TEST(SegmentTest, Counts) {
  EXPECT_EQ(SegmentCount(1300, {15, 1}), 1300);
  EXPECT_EQ(SegmentCount(10, {15, 10}), 1);
  EXPECT_EQ(SegmentCount(30, {15, 1}), 30);
  EXPECT_EQ(SegmentCount(30, {15, 15}), 2);
  EXPECT_EQ(SegmentCount(31, {15, 15}), 3);
  EXPECT_SPECATTR_ERROR(SegmentCount(10, {14, 1}), ErrorCode::kDomain);
  EXPECT_SPECATTR_ERROR(SegmentCount(10, {15, 0}), ErrorCode::kDomain);
  EXPECT_EQ(SegmentSpectrogram(RandomSpec(1300, 1), {}).size(), 1300u);
}

TEST(SegmentTest, CentredWithZeroPadding) {
  const Spectrogram spec = RandomSpec(10, 2);
  const std::vector<Segment> segs = SegmentSpectrogram(spec, {5, 3});
  ASSERT_EQ(segs.size(), 4u);
  for (const Segment& s : segs) {
    EXPECT_EQ(s.values.shape(), (Shape{1, 48, 5}));
    for (int64_t r = 0; r < 48; ++r) {
      for (int64_t j = 0; j < 5; ++j) {
        const int64_t col = s.position - 2 + j;
        const float want = (col < 0 || col >= 10) ? 0.0f : spec.values()[r * 10 + col];
        EXPECT_EQ(s.values[r * 5 + j], want);
      }
    }
  }
  EXPECT_EQ(segs[3].position, 9);
  const std::vector<Segment> lone = SegmentSpectrogram(RandomSpec(10, 3), {15, 10});
  ASSERT_EQ(lone.size(), 1u);
  EXPECT_EQ(lone[0].position, 0);
}

TEST(OverlapTest, NonOverlappingIsConcatenation) {
  const Tensor full = RandomTensor({1, 48, 15}, 4, -1, 1);
  const std::vector<Segment> segs = SegmentSpectrogram(Spectrogram(RandomTensor({1, 48, 15}, 4)),
                                                       {5, 5});
  ASSERT_EQ(segs.size(), 3u);
  std::vector<AttributionMap> maps;
  std::vector<int64_t> pos;
  for (int64_t s = 0; s < 3; ++s) {
    // Window centred on column 5s covers 5s-2 .. 5s+2.
    std::vector<float> v(48 * 5, 0.0f);
    for (int64_t r = 0; r < 48; ++r) {
      for (int64_t j = 0; j < 5; ++j) {
        const int64_t col = 5 * s - 2 + j;
        if (col >= 0 && col < 15) v[r * 5 + j] = full[r * 15 + col];
      }
    }
    maps.push_back(MapOf(Tensor({1, 48, 5}, v)));
    pos.push_back(5 * s);
  }
  const OverlapResult r = OverlapAverage(maps, pos, 15);
  for (int64_t c = 0; c < 13; ++c) EXPECT_EQ(r.coverage[c], 1) << c;
  EXPECT_EQ(r.coverage[13], 0);
  for (int64_t row = 0; row < 48; ++row) {
    for (int64_t c = 0; c < 13; ++c) EXPECT_EQ(r.map.values[row * 15 + c], full[row * 15 + c]);
    EXPECT_EQ(r.map.values[row * 15 + 14], 0.0f);
  }
}

TEST(OverlapTest, ConstantMapsAndCoverage) {
  const int64_t frames = 1300;
  std::vector<AttributionMap> maps;
  std::vector<int64_t> pos;
  for (int64_t t = 0; t < frames; ++t) {
    maps.push_back(MapOf(Tensor::Filled({1, 48, 15}, 0.375f)));
    pos.push_back(t);
  }
  const OverlapResult r = OverlapAverage(maps, pos, frames);
  EXPECT_EQ(r.coverage[0], 8);
  EXPECT_EQ(r.coverage[frames - 1], 8);
  EXPECT_EQ(r.coverage[3], 11);
  EXPECT_EQ(r.coverage[650], 15);
  for (float v : r.map.values.values()) EXPECT_EQ(v, 0.375f);
}

TEST(OverlapTest, RoundTripsRestrictionsOfAFullMap) {
  const int64_t frames = 40;
  const Tensor full = RandomTensor({1, 48, frames}, 9, -1, 1);
  const Spectrogram shifted(RandomTensor({1, 48, frames}, 9, 0, 1));
  OverlapAccumulator acc({1, 48, 15}, frames);
  for (int64_t t = 0; t < frames; ++t) {
    std::vector<float> v(48 * 15, 0.0f);
    for (int64_t r = 0; r < 48; ++r) {
      for (int64_t j = 0; j < 15; ++j) {
        const int64_t col = t - 7 + j;
        if (col >= 0 && col < frames) v[r * 15 + j] = full[r * frames + col];
      }
    }
    acc.Add(t, MapOf(Tensor({1, 48, 15}, v)));
  }
  const AttributionMap out = acc.Finish();
  EXPECT_TRUE(out.values.BitwiseEquals(full));
  EXPECT_SPECATTR_ERROR(acc.Add(frames, MapOf(Tensor::Filled({1, 48, 15}, 0.0f))),
                        ErrorCode::kPositionOutOfRange);
  EXPECT_SPECATTR_ERROR(acc.Add(0, MapOf(Tensor::Filled({1, 48, 13}, 0.0f))), ErrorCode::kShape);
}

TEST(OverlapTest, BaselineIdKeptOnlyWhenShared) {
  AttributionMap a = MapOf(Tensor::Filled({1, 48, 3}, 1.0f));
  AttributionMap b = a;
  a.baseline_id = "x";
  b.baseline_id = "x";
  OverlapAccumulator same({1, 48, 3}, 4);
  same.Add(0, a);
  same.Add(2, b);
  EXPECT_EQ(same.Finish().baseline_id, "x");
  b.baseline_id = "y";
  OverlapAccumulator mixed({1, 48, 3}, 4);
  mixed.Add(0, a);
  mixed.Add(2, b);
  EXPECT_FALSE(mixed.Finish().baseline_id.has_value());
}

TEST(ExplainSegmentsTest, GridSize) {
  const Model m = MakeNisqaLikeModel(1);
  const std::vector<Segment> segs = SegmentSpectrogram(RandomSpec(30, 5), {});
  std::vector<TargetSelector> targets;
  for (int64_t k = 0; k < 20; ++k) targets.push_back(TargetSelector::Feature(k));
  const std::vector<Tensor> base = {Tensor::Filled({1, 48, 15}, 0.0f)};
  const SegmentExplanations ex =
      ExplainSegments(m, segs, Method::kDeepLift, targets, base, {});
  size_t count = 0;
  for (const auto& row : ex.maps) count += row.size();
  EXPECT_EQ(ex.maps.size(), 30u);
  EXPECT_EQ(count, 600u);
  EXPECT_SPECATTR_ERROR(ExplainSegments(m, segs, Method::kOcclusion, targets, base, {}),
                        ErrorCode::kDomain);
}

TEST(ExplainSegmentsTest, ZeroSpectrogramGivesEmptyMaps) {
  const Model m = MakeNisqaLikeModel(1);
  const std::vector<Segment> segs =
      SegmentSpectrogram(Spectrogram(Tensor::Filled({1, 48, 6}, 0.0f)), {});
  const std::vector<TargetSelector> targets = {TargetSelector::Feature(0), TargetSelector::Head()};
  const std::vector<Tensor> base = {Tensor::Filled({1, 48, 15}, 0.0f)};
  for (Method method : {Method::kIntegratedGradients, Method::kDeepLift}) {
    const SegmentExplanations ex = ExplainSegments(m, segs, method, targets, base, {8});
    for (size_t s = 0; s < segs.size(); ++s) {
      for (size_t t = 0; t < targets.size(); ++t) {
        EXPECT_EQ(ex.present[s][t], 0);
        for (float v : ex.maps[s][t].values.values()) EXPECT_EQ(v, 0.0f);
      }
    }
  }
}

TEST(ExplainSegmentsTest, ClonedChannelMapsAreIdentical) {
  const Model m = WithMirroredFeature(MakeNisqaLikeModel(2), 0, 19, 1.0f);
  const std::vector<Segment> segs = SegmentSpectrogram(RandomSpec(8, 6), {});
  const std::vector<TargetSelector> targets = {TargetSelector::Feature(0),
                                               TargetSelector::Feature(19)};
  const std::vector<Tensor> base = {Tensor::Filled({1, 48, 15}, 0.0f)};
  for (Method method : {Method::kIntegratedGradients, Method::kDeepLift}) {
    const SegmentExplanations ex = ExplainSegments(m, segs, method, targets, base, {8});
    for (size_t s = 0; s < segs.size(); ++s) {
      EXPECT_TRUE(ex.maps[s][0].values.BitwiseEquals(ex.maps[s][1].values));
    }
  }
}

TEST(FeatureReportTest, CloneNegateAndZero) {
  const Tensor a = RandomTensor({1, 48, 20}, 11, -1, 1);
  std::vector<float> neg(a.values().begin(), a.values().end());
  for (float& v : neg) v = -v;
  const std::vector<AttributionMap> maps = {
      MapOf(a, TargetSelector::Feature(0)), MapOf(a, TargetSelector::Feature(1)),
      MapOf(Tensor({1, 48, 20}, neg), TargetSelector::Feature(2)),
      MapOf(Tensor::Filled({1, 48, 20}, 0.0f), TargetSelector::Feature(3))};
  const FeatureReport r = MakeFeatureReport(maps, DefaultPresenceThreshold(15), 4, 15);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(*r.Correlation(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(*r.Correlation(0, 2), -1.0, 1e-9);
  EXPECT_EQ(*r.Correlation(0, 0), 1.0);
  EXPECT_FALSE(r.Correlation(3, 3).has_value());
  EXPECT_FALSE(r.Correlation(0, 3).has_value());
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) EXPECT_EQ(r.Correlation(i, j), r.Correlation(j, i));
  }
  EXPECT_EQ(r.inverted_pairs, (std::vector<std::pair<size_t, size_t>>{{0, 2}, {1, 2}}));
  EXPECT_EQ(r.presence_ratio[3], 0.0);
  EXPECT_EQ(r.presence[3], Presence::kNever);
  EXPECT_EQ(r.presence[0], Presence::kAlways);
  EXPECT_EQ(r.names[3], "feature:3");

  const auto doc = nlohmann::json::parse(r.ToJson());
  EXPECT_EQ(doc.at("correlation")[3][3], "n/a");
  EXPECT_EQ(doc.at("features")[3].at("presence"), "never");
  EXPECT_EQ(doc.at("inverted_pairs").size(), 2u);
}

TEST(FeatureReportTest, PresenceCountsWindowsWithMass) {
  // Mass only in column 10 of 40: windows of width 5 centred on 8..12 see it.
  std::vector<float> v(48 * 40, 0.0f);
  v[3 * 40 + 10] = 1.0f;
  const std::vector<AttributionMap> maps = {MapOf(Tensor({1, 48, 40}, v))};
  const FeatureReport r = MakeFeatureReport(maps, 0.5, 4, 5);
  EXPECT_DOUBLE_EQ(r.presence_ratio[0], 5.0 / 40.0);
  EXPECT_EQ(r.presence[0], Presence::kSometimes);
  EXPECT_SPECATTR_ERROR(MakeFeatureReport(maps, 0.5, 49, 5), ErrorCode::kDomain);
  const std::vector<AttributionMap> mixed = {maps[0], MapOf(Tensor::Filled({1, 48, 39}, 0.0f))};
  EXPECT_SPECATTR_ERROR(MakeFeatureReport(mixed, 0.5, 4, 5), ErrorCode::kShape);
}

TEST(BandProfileTest, LowRowsAreBandZero) {
  std::vector<float> v(48 * 2, 0.0f);
  v[0] = 3.0f;         // row 0
  v[47 * 2 + 1] = -1.0f;  // row 47
  const std::vector<double> p = BandProfile(Tensor({1, 48, 2}, v), 4);
  EXPECT_EQ(p, (std::vector<double>{0.75, 0.0, 0.0, 0.25}));
  const std::vector<double> zero = BandProfile(Tensor::Filled({1, 48, 2}, 0.0f), 4);
  EXPECT_EQ(zero, (std::vector<double>(4, 0.0)));
}

TEST(ConductanceRegionsTest, SingleFilterAndDeadFilter) {
  const Model single({1, 8, 5}, {LayerSpec::Conv2d(1, 1, {3, 3}, {1, 1}, {1, 1},
                                                   std::vector<float>(9, 0.2f), {0.1f}),
                                 LayerSpec::Relu(), LayerSpec::GlobalAvgPool()});
  const Tensor x = RandomTensor({1, 8, 5}, 12);
  const Tensor b = Tensor::Filled({1, 8, 5}, 0.0f);
  const std::vector<FilterRegion> rows = ConductanceRegions(single, x, b, 1,
                                                            TargetSelector::Feature(0), 4);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(std::accumulate(rows[0].profile.begin(), rows[0].profile.end(), 0.0), 1.0, 1e-12);

  std::vector<float> w(18, 0.3f);
  for (int i = 9; i < 18; ++i) w[i] = 0.0f;
  const Model two({1, 8, 5}, {LayerSpec::Conv2d(1, 2, {3, 3}, {1, 1}, {1, 1}, w, {0.1f, 0.0f}),
                              LayerSpec::Relu(), LayerSpec::GlobalAvgPool(),
                              LayerSpec::Dense(2, 1, {1.0f, 1.0f}, {0.0f})});
  const std::vector<FilterRegion> r2 = ConductanceRegions(two, x, b, 1, TargetSelector::Feature(0), 4);
  ASSERT_EQ(r2.size(), 2u);
  EXPECT_FALSE(r2[0].inactive);
  EXPECT_TRUE(r2[1].inactive);
  EXPECT_EQ(r2[1].profile, (std::vector<double>(4, 0.0)));
  EXPECT_SPECATTR_ERROR(ConductanceRegions(two, x, b, 2, TargetSelector::Feature(0), 4),
                        ErrorCode::kLayerOutOfRange);
}

// Frozen from the first run; guards against silent numeric drift.
TEST(ConductanceRegionsTest, DemoLayerOneRegression) {
  const Model m = MakeNisqaLikeModel(7);
  const Tensor x = RandomTensor({1, 48, 15}, 1);
  const std::vector<FilterRegion> rows = ConductanceRegions(
      m, x, Tensor::Filled({1, 48, 15}, 0.0f), 1, TargetSelector::Head(), 4, {64});
  const double want[8][4] = {{0.187099104, 0.295615932, 0.251747945, 0.265537019},
                             {0.210863631, 0.283120948, 0.324223487, 0.181791934},
                             {0.245205033, 0.254195329, 0.239787279, 0.260812358},
                             {0.235386428, 0.24658375, 0.249033419, 0.268996404},
                             {0.162037696, 0.188796596, 0.308637983, 0.340527725},
                             {0.298438567, 0.246030192, 0.258786106, 0.196745136},
                             {0.298611078, 0.24005351, 0.252206916, 0.209128496},
                             {0.324831015, 0.229545652, 0.209101949, 0.236521384}};
  ASSERT_EQ(rows.size(), 8u);
  for (size_t f = 0; f < 8; ++f) {
    EXPECT_FALSE(rows[f].inactive);
    double sum = 0.0;
    for (size_t k = 0; k < 4; ++k) {
      EXPECT_NEAR(rows[f].profile[k], want[f][k], 1e-6) << f << "," << k;
      sum += rows[f].profile[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(RunPipelineTest, ThreadCountDoesNotChangeResults) {
  const Model m = MakeNisqaLikeModel(3);
  const Spectrogram spec = RandomSpec(70, 13);
  PipelineConfig cfg;
  cfg.path = {4};
  for (int64_t k = 0; k < 20; ++k) cfg.targets.push_back(TargetSelector::Feature(k));
  cfg.threads = 1;
  const PipelineResult a = RunPipeline(m, spec, cfg);
  cfg.threads = 3;
  const PipelineResult b = RunPipeline(m, spec, cfg);
  EXPECT_EQ(a.segments, 70);
  ASSERT_EQ(a.full_maps.size(), 20u);
  for (size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(a.full_maps[k].values.shape(), (Shape{1, 48, 70}));
    EXPECT_TRUE(a.full_maps[k].values.BitwiseEquals(b.full_maps[k].values));
  }
  EXPECT_EQ(a.report.ToJson(), b.report.ToJson());
  EXPECT_EQ(a.empty_segments, b.empty_segments);
}

TEST(RunPipelineTest, MatchesManualSegmentAndAverage) {
  const Model m = MakeNisqaLikeModel(4);
  const Spectrogram spec = RandomSpec(20, 14);
  PipelineConfig cfg;
  cfg.method = Method::kDeepLift;
  cfg.segment = {15, 2};
  cfg.baseline_fill = 0.1f;
  cfg.targets = {TargetSelector::Feature(5)};
  const PipelineResult r = RunPipeline(m, spec, cfg);
  const std::vector<Segment> segs = SegmentSpectrogram(spec, cfg.segment);
  OverlapAccumulator acc({1, 48, 15}, 20);
  for (const Segment& s : segs) {
    acc.Add(s.position, DeepLiftRescale(m, s.values, Tensor::Filled({1, 48, 15}, 0.1f),
                                        TargetSelector::Feature(5)));
  }
  EXPECT_TRUE(r.full_maps[0].values.BitwiseEquals(acc.Finish().values));
  EXPECT_EQ(r.segments, 10);
}

}  // namespace
}  // namespace specattr
