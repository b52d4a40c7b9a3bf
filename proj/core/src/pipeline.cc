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

#include <algorithm>
#include <cmath>
#include <utility>

#include "json.hpp"
#include "specattr/error.h"
#include "specattr/parallel.h"
#include "specattr/presets.h"

namespace specattr {
namespace {

constexpr int64_t kChunkSegments = 64;

double L1(const Tensor& t) {
  double s = 0.0;
  for (float v : t.values()) s += std::abs(static_cast<double>(v));
  return s;
}

struct Grid {
  int64_t channels, height, width;
};

Grid GridOf(const Shape& shape) {
  if (shape.size() == 3) return {shape[0], shape[1], shape[2]};
  if (shape.size() == 2) return {1, shape[0], shape[1]};
  Fail(ErrorCode::kShape, "expected a [C,H,W] or [H,W] map, got " + ShapeToString(shape));
}

// Pearson correlation in double; nullopt when either side has zero variance.
std::optional<double> Pearson(const Tensor& a, const Tensor& b) {
  const double n = static_cast<double>(a.size());
  const double ma = ReduceSum(a) / n, mb = ReduceSum(b) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / (std::sqrt(saa) * std::sqrt(sbb));
}

}  // namespace

Spectrogram::Spectrogram(Tensor values, std::string source_id, double frame_rate)
    : source_id_(std::move(source_id)), frame_rate_(frame_rate) {
  Shape shape = values.shape();
  if (shape.size() == 2) shape.insert(shape.begin(), 1);
  if (shape.size() != 3 || shape[0] != 1) {
    Fail(ErrorCode::kShape, "spectrogram must be [1,48,T], got " + ShapeToString(values.shape()));
  }
  if (shape[1] != kSpectrogramHeight) {
    Fail(ErrorCode::kHeightNot48, "spectrogram height is " + std::to_string(shape[1]));
  }
  for (float v : values.values()) {
    if (v < 0.0f) Fail(ErrorCode::kDomain, "spectrogram magnitudes must be nonnegative");
  }
  const auto v = values.values();
  values_ = Tensor(std::move(shape), std::vector<float>(v.begin(), v.end()));
}

void CheckSegmentConfig(const SegmentConfig& cfg) {
  if (cfg.width < 1 || cfg.width % 2 == 0) {
    Fail(ErrorCode::kDomain, "segment width must be odd and >= 1, got " +
                                 std::to_string(cfg.width));
  }
  if (cfg.hop < 1) Fail(ErrorCode::kDomain, "segment hop must be >= 1");
}

int64_t SegmentCount(int64_t frames, const SegmentConfig& cfg) {
  CheckSegmentConfig(cfg);
  if (frames < 1) Fail(ErrorCode::kDomain, "frame count must be >= 1");
  return (frames + 2 * (cfg.width / 2) - cfg.width) / cfg.hop + 1;
}

std::vector<Segment> SegmentSpectrogram(const Spectrogram& spec, const SegmentConfig& cfg) {
  const int64_t count = SegmentCount(spec.frames(), cfg);
  const int64_t t = spec.frames(), w = cfg.width, half = w / 2;
  const auto src = spec.values().values();
  std::vector<Segment> out;
  out.reserve(static_cast<size_t>(count));
  for (int64_t s = 0; s < count; ++s) {
    const int64_t centre = s * cfg.hop;
    std::vector<float> v(static_cast<size_t>(kSpectrogramHeight * w), 0.0f);
    for (int64_t r = 0; r < kSpectrogramHeight; ++r) {
      for (int64_t j = 0; j < w; ++j) {
        const int64_t col = centre - half + j;
        if (col >= 0 && col < t) v[r * w + j] = src[r * t + col];
      }
    }
    out.push_back({centre, Tensor({1, kSpectrogramHeight, w}, std::move(v))});
  }
  return out;
}

SegmentExplanations ExplainSegments(const Model& model, std::span<const Segment> segments,
                                    Method method, std::span<const TargetSelector> targets,
                                    std::span<const Tensor> baselines, const PathConfig& path,
                                    int threads) {
  if (method != Method::kIntegratedGradients && method != Method::kDeepLift) {
    Fail(ErrorCode::kDomain, "segment explanations support ig and deeplift, not " +
                                 std::string(MethodName(method)));
  }
  if (baselines.size() != 1 && baselines.size() != segments.size()) {
    Fail(ErrorCode::kShape, "need one shared baseline or one per segment");
  }
  for (TargetSelector t : targets) model.CheckTarget(t);
  SegmentExplanations out;
  out.maps.resize(segments.size());
  out.present.resize(segments.size());
  ParallelFor(segments.size(), threads, [&](size_t s) {
    const Tensor& baseline = baselines.size() == 1 ? baselines[0] : baselines[s];
    out.maps[s] = method == Method::kIntegratedGradients
                      ? IntegratedGradients(model, segments[s].values, baseline, targets, path)
                      : DeepLiftRescale(model, segments[s].values, baseline, targets);
    out.present[s].resize(targets.size());
    for (size_t t = 0; t < targets.size(); ++t) {
      out.present[s][t] = L1(out.maps[s][t].values) >= kEmptyMapL1 ? 1 : 0;
    }
  });
  return out;
}

OverlapAccumulator::OverlapAccumulator(Shape segment_shape, int64_t frames)
    : segment_shape_(std::move(segment_shape)), frames_(frames) {
  const Grid g = GridOf(segment_shape_);
  if (g.width % 2 == 0) Fail(ErrorCode::kShape, "segment width must be odd");
  if (frames < 1) Fail(ErrorCode::kDomain, "frame count must be >= 1");
  sums_.assign(static_cast<size_t>(g.channels * g.height * frames), 0.0);
  coverage_.assign(static_cast<size_t>(frames), 0);
}

void OverlapAccumulator::Add(int64_t position, const AttributionMap& map) {
  if (map.values.shape() != segment_shape_) {
    Fail(ErrorCode::kShape, "segment map " + ShapeToString(map.values.shape()) +
                                " differs from " + ShapeToString(segment_shape_));
  }
  if (position < 0 || position >= frames_) {
    Fail(ErrorCode::kPositionOutOfRange, "segment position " + std::to_string(position) +
                                             " outside [0," + std::to_string(frames_) + ")");
  }
  const Grid g = GridOf(segment_shape_);
  const int64_t half = g.width / 2;
  const auto v = map.values.values();
  for (int64_t j = 0; j < g.width; ++j) {
    const int64_t col = position - half + j;
    if (col < 0 || col >= frames_) continue;
    coverage_[col] += 1;
    for (int64_t r = 0; r < g.channels * g.height; ++r) {
      sums_[r * frames_ + col] += v[r * g.width + j];
    }
  }
  if (!meta_) {
    meta_ = map;
  } else if (meta_->baseline_id != map.baseline_id) {
    same_baseline_ = false;
  }
}

AttributionMap OverlapAccumulator::Finish() const {
  const Grid g = GridOf(segment_shape_);
  std::vector<double> v(sums_.size(), 0.0);
  for (int64_t r = 0; r < g.channels * g.height; ++r) {
    for (int64_t c = 0; c < frames_; ++c) {
      if (coverage_[c] > 0) v[r * frames_ + c] = sums_[r * frames_ + c] / coverage_[c];
    }
  }
  Shape shape = segment_shape_;
  shape.back() = frames_;
  AttributionMap map;
  map.values = ToTensor(shape, v);
  if (meta_) {
    map.method = meta_->method;
    map.target = meta_->target;
    if (same_baseline_) map.baseline_id = meta_->baseline_id;
    map.layer = meta_->layer;
  }
  return map;
}

OverlapResult OverlapAverage(std::span<const AttributionMap> maps,
                             std::span<const int64_t> positions, int64_t frames) {
  if (maps.size() != positions.size()) {
    Fail(ErrorCode::kShape, "one position per map required");
  }
  if (maps.empty()) Fail(ErrorCode::kShape, "no maps to average");
  OverlapAccumulator acc(maps[0].values.shape(), frames);
  for (size_t i = 0; i < maps.size(); ++i) acc.Add(positions[i], maps[i]);
  return {acc.Finish(), acc.coverage()};
}

std::string_view PresenceName(Presence p) {
  switch (p) {
    case Presence::kAlways:
      return "always";
    case Presence::kSometimes:
      return "sometimes";
    case Presence::kNever:
      return "never";
  }
  return "?";
}

double DefaultPresenceThreshold(int64_t window) {
  return 1e-6 * static_cast<double>(kSpectrogramHeight * window);
}

std::vector<double> BandProfile(const Tensor& values, int64_t bands) {
  const Grid g = GridOf(values.shape());
  if (bands < 1 || bands > g.height) {
    Fail(ErrorCode::kDomain, "band count must be in [1," + std::to_string(g.height) + "]");
  }
  std::vector<double> mass(static_cast<size_t>(bands), 0.0);
  const auto v = values.values();
  for (int64_t c = 0; c < g.channels; ++c) {
    for (int64_t r = 0; r < g.height; ++r) {
      const int64_t band = r * bands / g.height;
      for (int64_t x = 0; x < g.width; ++x) {
        mass[band] += std::abs(static_cast<double>(v[(c * g.height + r) * g.width + x]));
      }
    }
  }
  double total = 0.0;
  for (double m : mass) total += m;
  if (total > 0.0) {
    for (double& m : mass) m /= total;
  }
  return mass;
}

FeatureReport MakeFeatureReport(std::span<const AttributionMap> maps, double threshold,
                                int64_t bands, int64_t window) {
  if (maps.empty()) Fail(ErrorCode::kShape, "feature report needs at least one map");
  if (window < 1) Fail(ErrorCode::kDomain, "presence window must be >= 1");
  const Shape& shape = maps[0].values.shape();
  for (const AttributionMap& m : maps) {
    if (m.values.shape() != shape) {
      Fail(ErrorCode::kShape, "feature maps differ in shape: " + ShapeToString(shape) + " vs " +
                                  ShapeToString(m.values.shape()));
    }
  }
  const Grid g = GridOf(shape);
  if (bands < 1 || bands > g.height) {
    Fail(ErrorCode::kDomain, "band count must be in [1," + std::to_string(g.height) + "]");
  }
  const size_t n = maps.size();
  FeatureReport rep;
  rep.window = window;
  rep.threshold = threshold;
  rep.bands = bands;
  const int64_t half = window / 2;
  for (const AttributionMap& m : maps) {
    rep.names.push_back(m.target.ToString());
    std::vector<double> column(static_cast<size_t>(g.width), 0.0);
    const auto v = m.values.values();
    for (int64_t r = 0; r < g.channels * g.height; ++r) {
      for (int64_t c = 0; c < g.width; ++c) column[c] += std::abs(static_cast<double>(v[r * g.width + c]));
    }
    int64_t present = 0;
    for (int64_t t = 0; t < g.width; ++t) {
      double mass = 0.0;
      for (int64_t c = std::max<int64_t>(0, t - half); c <= std::min(g.width - 1, t + half); ++c) {
        mass += column[c];
      }
      if (mass > threshold) ++present;
    }
    const double ratio = static_cast<double>(present) / static_cast<double>(g.width);
    rep.presence_ratio.push_back(ratio);
    rep.presence.push_back(ratio > 0.9 ? Presence::kAlways
                                       : ratio < 0.01 ? Presence::kNever : Presence::kSometimes);
    rep.band_profile.push_back(BandProfile(m.values, bands));
  }
  rep.correlation.assign(n * n, std::nullopt);
  for (size_t i = 0; i < n; ++i) {
    const bool defined = Pearson(maps[i].values, maps[i].values).has_value();
    if (defined) rep.correlation[i * n + i] = 1.0;
    for (size_t j = i + 1; j < n; ++j) {
      const std::optional<double> r = Pearson(maps[i].values, maps[j].values);
      rep.correlation[i * n + j] = r;
      rep.correlation[j * n + i] = r;
      if (r && *r < kInvertedCorrelation) rep.inverted_pairs.emplace_back(i, j);
    }
  }
  return rep;
}

std::string FeatureReport::ToJson() const {
  nlohmann::ordered_json doc;
  doc["format"] = "specattr-feature-report";
  doc["format_version"] = 1;
  doc["window"] = window;
  doc["threshold"] = threshold;
  doc["bands"] = bands;
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (size_t i = 0; i < size(); ++i) {
    features.push_back({{"target", names[i]},
                        {"presence_ratio", presence_ratio[i]},
                        {"presence", PresenceName(presence[i])},
                        {"band_profile", band_profile[i]}});
  }
  doc["features"] = std::move(features);
  nlohmann::ordered_json matrix = nlohmann::ordered_json::array();
  for (size_t i = 0; i < size(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (size_t j = 0; j < size(); ++j) {
      const std::optional<double> r = Correlation(i, j);
      if (r) {
        row.push_back(*r);
      } else {
        row.push_back("n/a");
      }
    }
    matrix.push_back(std::move(row));
  }
  doc["correlation"] = std::move(matrix);
  nlohmann::ordered_json inverted = nlohmann::ordered_json::array();
  for (const auto& [i, j] : inverted_pairs) {
    inverted.push_back({{"a", names[i]}, {"b", names[j]}, {"correlation", *Correlation(i, j)}});
  }
  doc["inverted_pairs"] = std::move(inverted);
  return doc.dump(2) + "\n";
}

std::vector<FilterRegion> ConductanceRegions(const Model& model, const Tensor& segment,
                                             const Tensor& baseline, size_t layer,
                                             TargetSelector target, int64_t bands,
                                             const PathConfig& path) {
  if (layer < 1 || layer > model.layer_count() ||
      model.layers()[layer - 1].kind != LayerKind::kConv2d) {
    Fail(ErrorCode::kLayerOutOfRange,
         "layer " + std::to_string(layer) + " is not the output of a conv2d layer");
  }
  const AttributionMap cond = Conductance(model, segment, baseline, layer, target, path);
  const Grid g = GridOf(cond.values.shape());
  const int64_t plane = g.height * g.width;
  std::vector<FilterRegion> out;
  for (int64_t c = 0; c < g.channels; ++c) {
    const auto v = cond.values.values().subspan(static_cast<size_t>(c * plane),
                                                static_cast<size_t>(plane));
    FilterRegion row;
    row.filter = c;
    row.profile = BandProfile(Tensor({g.height, g.width}, std::vector<float>(v.begin(), v.end())),
                              bands);
    row.inactive = std::all_of(row.profile.begin(), row.profile.end(),
                               [](double x) { return x == 0.0; });
    out.push_back(std::move(row));
  }
  return out;
}

PipelineResult RunPipeline(const Model& model, const Spectrogram& spec,
                           const PipelineConfig& cfg) {
  CheckSegmentConfig(cfg.segment);
  const Shape seg_shape{1, kSpectrogramHeight, cfg.segment.width};
  if (model.input_shape() != seg_shape) {
    Fail(ErrorCode::kShape, "model input " + ShapeToString(model.input_shape()) +
                                " does not match segment " + ShapeToString(seg_shape));
  }
  if (cfg.targets.empty()) Fail(ErrorCode::kDomain, "pipeline needs at least one target");
  if (!std::isfinite(cfg.baseline_fill)) Fail(ErrorCode::kDomain, "baseline must be finite");
  if (cfg.baseline && cfg.baseline->frames() != spec.frames()) {
    Fail(ErrorCode::kShape, "baseline spectrogram has " + std::to_string(cfg.baseline->frames()) +
                                " frames, input has " + std::to_string(spec.frames()));
  }
  const std::vector<Segment> segments = SegmentSpectrogram(spec, cfg.segment);
  std::vector<Tensor> baselines;
  if (cfg.baseline) {
    for (Segment& s : SegmentSpectrogram(*cfg.baseline, cfg.segment)) {
      baselines.push_back(std::move(s.values));
    }
  } else {
    baselines.push_back(Tensor::Filled(seg_shape, cfg.baseline_fill));
  }

  PipelineResult result;
  result.segments = static_cast<int64_t>(segments.size());
  result.empty_segments.assign(cfg.targets.size(), 0);
  std::vector<OverlapAccumulator> acc(cfg.targets.size(),
                                      OverlapAccumulator(seg_shape, spec.frames()));
  for (size_t lo = 0; lo < segments.size(); lo += kChunkSegments) {
    const size_t n = std::min<size_t>(kChunkSegments, segments.size() - lo);
    const std::span<const Tensor> chunk_baselines =
        baselines.size() == 1 ? std::span<const Tensor>(baselines)
                              : std::span<const Tensor>(baselines).subspan(lo, n);
    const SegmentExplanations ex =
        ExplainSegments(model, std::span(segments).subspan(lo, n), cfg.method, cfg.targets,
                        chunk_baselines, cfg.path, cfg.threads);
    for (size_t s = 0; s < n; ++s) {
      for (size_t t = 0; t < cfg.targets.size(); ++t) {
        acc[t].Add(segments[lo + s].position, ex.maps[s][t]);
        if (!ex.present[s][t]) ++result.empty_segments[t];
      }
    }
  }
  for (const OverlapAccumulator& a : acc) result.full_maps.push_back(a.Finish());
  const double threshold =
      cfg.threshold < 0.0 ? DefaultPresenceThreshold(cfg.segment.width) : cfg.threshold;
  result.report = MakeFeatureReport(result.full_maps, threshold, cfg.bands, cfg.segment.width);
  return result;
}

}  // namespace specattr
