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

#ifndef SPECATTR_PIPELINE_H_
#define SPECATTR_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specattr/attrib.h"
#include "specattr/net.h"
#include "specattr/tensor.h"

namespace specattr {

// A [1, 48, T] magnitude image. Row 0 is the lowest frequency bin.
class Spectrogram {
 public:
  // Throws HeightNot48, ShapeError (not [1, 48, T] or [48, T]) and
  // DomainError on negative magnitudes.
  explicit Spectrogram(Tensor values, std::string source_id = {}, double frame_rate = 0.0);

  const Tensor& values() const { return values_; }
  int64_t frames() const { return values_.dim(2); }
  const std::string& source_id() const { return source_id_; }
  double frame_rate() const { return frame_rate_; }

 private:
  Tensor values_;
  std::string source_id_;
  double frame_rate_;
};

struct SegmentConfig {
  int64_t width = 15;
  int64_t hop = 1;
};

// Throws DomainError unless width is odd and >= 1 and hop >= 1.
void CheckSegmentConfig(const SegmentConfig& cfg);

// floor((T + 2*floor(W/2) - W) / hop) + 1.
int64_t SegmentCount(int64_t frames, const SegmentConfig& cfg);

struct Segment {
  // Spectrogram column the window is centred on.
  int64_t position;
  Tensor values;
};

// Windows of width W centred on columns 0, hop, 2*hop, ... with zero padding
// beyond both edges.
std::vector<Segment> SegmentSpectrogram(const Spectrogram& spec, const SegmentConfig& cfg);

inline constexpr double kEmptyMapL1 = 1e-9;

struct SegmentExplanations {
  // maps[s][t] explains segments[s] for targets[t].
  std::vector<std::vector<AttributionMap>> maps;
  // 0 where the map's L1 mass is below kEmptyMapL1 ("feature not present").
  std::vector<std::vector<uint8_t>> present;
};

// `baselines` holds either one tensor shared by all segments or one per
// segment. Only ig and deeplift are accepted (DomainError otherwise).
SegmentExplanations ExplainSegments(const Model& model, std::span<const Segment> segments,
                                    Method method, std::span<const TargetSelector> targets,
                                    std::span<const Tensor> baselines, const PathConfig& path,
                                    int threads = 1);

// Running column-wise overlap average for one target. Padding columns of a
// window are dropped; covered columns are averaged in insertion order.
class OverlapAccumulator {
 public:
  OverlapAccumulator(Shape segment_shape, int64_t frames);

  // Throws PositionOutOfRange, ShapeError.
  void Add(int64_t position, const AttributionMap& map);

  const std::vector<int32_t>& coverage() const { return coverage_; }
  // [C, H, T] map; uncovered columns are 0. Carries the method, target and
  // baseline id of the added maps (baseline id only when all agree).
  AttributionMap Finish() const;

 private:
  Shape segment_shape_;
  int64_t frames_;
  std::vector<double> sums_;
  std::vector<int32_t> coverage_;
  std::optional<AttributionMap> meta_;
  bool same_baseline_ = true;
};

struct OverlapResult {
  AttributionMap map;
  std::vector<int32_t> coverage;
};

OverlapResult OverlapAverage(std::span<const AttributionMap> maps,
                             std::span<const int64_t> positions, int64_t frames);

enum class Presence { kAlways, kSometimes, kNever };

std::string_view PresenceName(Presence p);

// Default presence threshold 1e-6 * 48 * W.
double DefaultPresenceThreshold(int64_t window);

struct FeatureReport {
  int64_t window = 15;
  double threshold = 0.0;
  int64_t bands = 4;
  std::vector<std::string> names;
  std::vector<double> presence_ratio;
  std::vector<Presence> presence;
  // Row-major n x n Pearson correlations; nullopt where a map is degenerate.
  std::vector<std::optional<double>> correlation;
  std::vector<std::pair<size_t, size_t>> inverted_pairs;
  // profile[f][b]: share of feature f's L1 mass in band b; band 0 holds the
  // lowest frequencies.
  std::vector<std::vector<double>> band_profile;

  size_t size() const { return presence_ratio.size(); }
  std::optional<double> Correlation(size_t i, size_t j) const {
    return correlation[i * size() + j];
  }
  std::string ToJson() const;
};

inline constexpr double kInvertedCorrelation = -0.9;

// Presence of a feature at column t is decided by the L1 mass of its full map
// over the W columns centred on t (clipped at the edges) exceeding
// `threshold`; the ratio is taken over all T columns. Throws ShapeError when
// maps differ in shape, DomainError on a band count outside [1, height].
FeatureReport MakeFeatureReport(std::span<const AttributionMap> maps, double threshold,
                                int64_t bands, int64_t window);

// L1 share of each horizontal band of a [C, H, W] (or [H, W]) map; rows of a
// multi-channel map are pooled per band. All zeros when the mass is 0.
std::vector<double> BandProfile(const Tensor& values, int64_t bands);

struct FilterRegion {
  int64_t filter = 0;
  std::vector<double> profile;
  bool inactive = false;
};

// Band profile of the conductance map of every channel of trace[layer], which
// must be the output of a conv2d layer (LayerOutOfRange otherwise).
std::vector<FilterRegion> ConductanceRegions(const Model& model, const Tensor& segment,
                                             const Tensor& baseline, size_t layer,
                                             TargetSelector target, int64_t bands,
                                             const PathConfig& path = {});

struct PipelineConfig {
  SegmentConfig segment;
  Method method = Method::kIntegratedGradients;
  PathConfig path;
  std::vector<TargetSelector> targets;
  // Constant baseline value, or a full spectrogram segmented like the input.
  float baseline_fill = 0.0f;
  std::optional<Spectrogram> baseline;
  double threshold = -1.0;  // < 0 selects DefaultPresenceThreshold
  int64_t bands = 4;
  int threads = 1;
};

struct PipelineResult {
  int64_t segments = 0;
  std::vector<AttributionMap> full_maps;
  std::vector<int64_t> empty_segments;
  FeatureReport report;
};

// Segment -> explain -> overlap-average -> report. Results do not depend on
// the thread count.
PipelineResult RunPipeline(const Model& model, const Spectrogram& spec,
                           const PipelineConfig& cfg);

}  // namespace specattr

#endif  // SPECATTR_PIPELINE_H_
