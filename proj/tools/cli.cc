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

#include "cli.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "specattr/attrib.h"
#include "specattr/error.h"
#include "specattr/formats.h"
#include "specattr/model_io.h"
#include "specattr/parallel.h"
#include "specattr/pipeline.h"
#include "specattr/presets.h"
#include "specattr/rng.h"
#include "specattr/validate.h"

namespace specattr {
namespace {

namespace fs = std::filesystem;

// Files are written into a hidden sibling directory and moved into place
// only by Commit(); an abandoned staging directory is removed.
class Staging {
 public:
  explicit Staging(const fs::path& dest_dir) {
    fs::path abs = fs::absolute(dest_dir).lexically_normal();
    if (!abs.has_filename()) abs = abs.parent_path();
    dest_ = abs;
    dir_ = abs.parent_path() /
           ("." + abs.filename().string() + ".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  ~Staging() {
    std::error_code ec;
    if (!committed_) fs::remove_all(dir_, ec);
  }

  fs::path Path(const std::string& name) const { return dir_ / name; }

  void Commit() {
    if (fs::exists(dest_) && !fs::is_directory(dest_)) {
      Fail(ErrorCode::kIo, dest_.string() + " exists and is not a directory");
    }
    if (!fs::exists(dest_)) {
      fs::create_directories(dest_.parent_path());
      fs::rename(dir_, dest_);
    } else {
      std::vector<fs::path> staged;
      for (const auto& e : fs::directory_iterator(dir_)) staged.push_back(e.path());
      std::sort(staged.begin(), staged.end());
      for (const fs::path& p : staged) fs::rename(p, dest_ / p.filename());
      fs::remove_all(dir_);
    }
    committed_ = true;
  }

 private:
  fs::path dest_;
  fs::path dir_;
  bool committed_ = false;
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) Fail(ErrorCode::kIo, "cannot create " + path.string());
  f << text;
  f.flush();
  if (!f) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

Model ResolveModel(const std::string& name) {
  if (fs::exists(name)) return LoadModelFile(name);
  if (name == "linear-fixture") return MakeLinearFixture();
  if (name == "nisqa-like" || name.rfind("nisqa-like:", 0) == 0) {
    uint64_t seed = 1;
    if (name.size() > 10) {
      const std::string_view s = std::string_view(name).substr(11);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        Fail(ErrorCode::kDomain, "bad built-in model seed in '" + name + "'");
      }
    }
    return MakeNisqaLikeModel(seed);
  }
  Fail(ErrorCode::kIo, "model manifest not found: " + name);
}

Spectrogram LoadSpectrogram(const std::string& path, const std::string& format) {
  const FileFormat f = format.empty() ? FileFormatFromPath(path) : ParseFileFormat(format);
  return ReadSpectrogram(path, f);
}

struct BaselineChoice {
  float fill = 0.0f;
  std::optional<Spectrogram> spectrogram;
};

BaselineChoice ParseBaseline(const std::string& text, const std::string& format) {
  BaselineChoice b;
  if (text == "zero") return b;
  if (text.rfind("const:", 0) == 0) {
    const std::string_view v = std::string_view(text).substr(6);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), b.fill);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(b.fill)) {
      Fail(ErrorCode::kDomain, "bad constant baseline '" + text + "'");
    }
    return b;
  }
  if (text.rfind("file:", 0) == 0) {
    b.spectrogram = LoadSpectrogram(text.substr(5), format);
    return b;
  }
  Fail(ErrorCode::kDomain, "baseline must be zero, const:V or file:P, got '" + text + "'");
}

// Baseline tensor for a direct (unsegmented) explanation of `input`.
Tensor DirectBaseline(const BaselineChoice& b, const Tensor& input) {
  if (!b.spectrogram) return Tensor::Filled(input.shape(), b.fill);
  if (b.spectrogram->values().shape() != input.shape()) {
    Fail(ErrorCode::kShape, "baseline " + ShapeToString(b.spectrogram->values().shape()) +
                                " does not match input " + ShapeToString(input.shape()));
  }
  return b.spectrogram->values();
}

std::pair<int64_t, int64_t> ParseExtent(const std::string& text) {
  static const std::regex re(R"((\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    Fail(ErrorCode::kDomain, "expected HxW, got '" + text + "'");
  }
  return {std::stoll(m[1]), std::stoll(m[2])};
}

std::vector<TargetSelector> ResolveTargets(const Model& model,
                                           const std::vector<std::string>& names,
                                           bool all_by_default) {
  std::vector<TargetSelector> targets;
  auto all = [&] {
    for (int64_t k = 0; k < model.output_dim(); ++k) targets.push_back(TargetSelector::Feature(k));
  };
  if (names.empty()) {
    if (all_by_default) {
      all();
    } else {
      targets.push_back(model.has_head() ? TargetSelector::Head() : TargetSelector::Feature(0));
    }
  }
  for (const std::string& n : names) {
    if (n == "all") {
      all();
    } else {
      targets.push_back(TargetSelector::Parse(n));
    }
  }
  for (TargetSelector t : targets) model.CheckTarget(t);
  return targets;
}

std::string FileStem(TargetSelector t) {
  return t.is_head() ? std::string("head") : "feat" + std::to_string(t.feature());
}

void WriteMapPair(const Staging& out, const std::string& stem, const AttributionMap& map) {
  WriteAttribution(map, out.Path(stem + ".att.bin"), FileFormat::kBin);
  RenderHeatmap(map, out.Path(stem + ".ppm"));
}

struct Common {
  std::string spec;
  std::string spec_format;
  std::string model;
  std::string out;
  int threads = 0;
};

void AddCommon(CLI::App* cmd, Common& c, bool needs_spec) {
  if (needs_spec) {
    cmd->add_option("--spec", c.spec, "spectrogram file (.csv or SPG1 binary)")->required();
    cmd->add_option("--spec-format", c.spec_format, "csv or bin (default: by extension)");
  }
  cmd->add_option("--model", c.model,
                  "model manifest, or built-in nisqa-like[:SEED] / linear-fixture")
      ->required();
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--threads", c.threads, "worker threads (0: available parallelism)")
      ->check(CLI::NonNegativeNumber);
}

struct PathOptions {
  int steps = 64;
  std::string rule = "trapezoid";

  PathConfig Config() const { return {steps, ParsePathRule(rule)}; }
};

void AddPath(CLI::App* cmd, PathOptions& p) {
  cmd->add_option("--steps", p.steps, "integration steps m")->check(CLI::PositiveNumber);
  cmd->add_option("--rule", p.rule, "trapezoid or midpoint");
}

int CmdOcclusion(const Common& c, const std::string& mask, const std::string& stride, float fill,
                 const std::vector<std::string>& target_names, std::ostream& log) {
  const Model model = ResolveModel(c.model);
  const Spectrogram spec = LoadSpectrogram(c.spec, c.spec_format);
  const auto [mh, mw] = ParseExtent(mask);
  const auto [sh, sw] = ParseExtent(stride);
  const std::vector<TargetSelector> targets = ResolveTargets(model, target_names, false);
  Staging out(c.out);
  for (TargetSelector t : targets) {
    const OcclusionResult r =
        Occlusion(model, spec.values(), MaskConfig{mh, mw, sh, sw, fill}, t, c.threads);
    const std::string stem = FileStem(t) + ".occlusion";
    WriteMapPair(out, stem, r.map);
    nlohmann::ordered_json grid;
    grid["target"] = t.ToString();
    grid["mask"] = {mh, mw};
    grid["stride"] = {sh, sw};
    grid["fill"] = fill;
    grid["original_score"] = r.original_score;
    grid["evaluations"] = r.evaluations();
    grid["row_starts"] = r.row_starts;
    grid["col_starts"] = r.col_starts;
    grid["influence"] = r.influence;
    WriteText(out.Path(stem + ".grid.json"), grid.dump(2) + "\n");
    log << t.ToString() << ": " << r.evaluations() << " mask positions\n";
  }
  out.Commit();
  return kExitOk;
}

int CmdExplain(Method method, const Common& c, const std::string& baseline,
               const PathOptions& path, int64_t hop, const std::vector<std::string>& target_names,
               std::ostream& log) {
  const Model model = ResolveModel(c.model);
  const Spectrogram spec = LoadSpectrogram(c.spec, c.spec_format);
  const BaselineChoice b = ParseBaseline(baseline, c.spec_format);
  const std::vector<TargetSelector> targets = ResolveTargets(model, target_names, true);
  const PathConfig pc = path.Config();
  std::vector<AttributionMap> maps;
  if (spec.values().shape() == model.input_shape()) {
    const Tensor base = DirectBaseline(b, spec.values());
    maps = method == Method::kIntegratedGradients
               ? IntegratedGradients(model, spec.values(), base, targets, pc)
               : DeepLiftRescale(model, spec.values(), base, targets);
  } else {
    PipelineConfig cfg;
    cfg.segment = {model.input_shape().back(), hop};
    cfg.method = method;
    cfg.path = pc;
    cfg.targets = targets;
    cfg.baseline_fill = b.fill;
    cfg.baseline = b.spectrogram;
    cfg.threads = c.threads;
    maps = RunPipeline(model, spec, cfg).full_maps;
  }
  Staging out(c.out);
  for (size_t t = 0; t < targets.size(); ++t) WriteMapPair(out, FileStem(targets[t]), maps[t]);
  out.Commit();
  log << "wrote " << targets.size() << " " << MethodName(method) << " maps\n";
  return kExitOk;
}

int CmdConductance(const Common& c, const std::string& baseline, const PathOptions& path,
                   size_t layer, std::optional<int64_t> column, int64_t bands,
                   const std::vector<std::string>& target_names, std::ostream& log) {
  const Model model = ResolveModel(c.model);
  const Spectrogram spec = LoadSpectrogram(c.spec, c.spec_format);
  const BaselineChoice b = ParseBaseline(baseline, c.spec_format);
  const std::vector<TargetSelector> targets = ResolveTargets(model, target_names, false);
  Tensor input = spec.values();
  Tensor base = Tensor::Filled(model.input_shape(), b.fill);
  if (spec.values().shape() == model.input_shape()) {
    base = DirectBaseline(b, input);
  } else {
    const SegmentConfig seg{model.input_shape().back(), 1};
    const int64_t col = column.value_or(spec.frames() / 2);
    if (col < 0 || col >= spec.frames()) {
      Fail(ErrorCode::kPositionOutOfRange, "column " + std::to_string(col) + " outside [0," +
                                               std::to_string(spec.frames()) + ")");
    }
    input = SegmentSpectrogram(spec, seg)[col].values;
    if (b.spectrogram) base = SegmentSpectrogram(*b.spectrogram, seg)[col].values;
  }
  const PathConfig pc = path.Config();
  Staging out(c.out);
  for (TargetSelector t : targets) {
    const AttributionMap map = Conductance(model, input, base, layer, t, pc);
    const std::string stem = FileStem(t) + ".layer" + std::to_string(layer);
    WriteMapPair(out, stem, map);
    if (layer >= 1 && model.layers()[layer - 1].kind == LayerKind::kConv2d) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const FilterRegion& r : ConductanceRegions(model, input, base, layer, t, bands, pc)) {
        rows.push_back({{"filter", r.filter}, {"profile", r.profile}, {"inactive", r.inactive}});
      }
      nlohmann::ordered_json doc;
      doc["target"] = t.ToString();
      doc["layer"] = layer;
      doc["bands"] = bands;
      doc["filters"] = std::move(rows);
      WriteText(out.Path(stem + ".regions.json"), doc.dump(2) + "\n");
    }
    log << t.ToString() << ": layer-sum gap " << *map.completeness_gap << "\n";
  }
  out.Commit();
  return kExitOk;
}

int CmdPipeline(const Common& c, const std::string& method, const std::string& baseline,
                const PathOptions& path, int64_t width, int64_t hop, double threshold,
                int64_t bands, std::ostream& log) {
  const Model model = ResolveModel(c.model);
  const Spectrogram spec = LoadSpectrogram(c.spec, c.spec_format);
  const BaselineChoice b = ParseBaseline(baseline, c.spec_format);
  PipelineConfig cfg;
  cfg.segment = {width, hop};
  cfg.method = ParseMethod(method);
  cfg.path = path.Config();
  cfg.targets = ResolveTargets(model, {}, true);
  cfg.baseline_fill = b.fill;
  cfg.baseline = b.spectrogram;
  cfg.threshold = threshold;
  cfg.bands = bands;
  cfg.threads = c.threads;
  const PipelineResult r = RunPipeline(model, spec, cfg);
  Staging out(c.out);
  for (size_t t = 0; t < cfg.targets.size(); ++t) {
    WriteMapPair(out, FileStem(cfg.targets[t]), r.full_maps[t]);
  }
  WriteText(out.Path("report.json"), r.report.ToJson());
  out.Commit();
  log << r.segments << " segments, " << r.full_maps.size() << " feature maps\n";
  return kExitOk;
}

int CmdReport(const std::string& maps_dir, double threshold, int64_t bands, int64_t width,
              const std::string& out_path, std::ostream& log) {
  if (!fs::is_directory(maps_dir)) Fail(ErrorCode::kIo, "not a directory: " + maps_dir);
  static const std::regex re(R"(feat(\d+)\.att\.bin)");
  std::map<int64_t, fs::path> files;
  for (const auto& e : fs::directory_iterator(maps_dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, re)) files[std::stoll(m[1])] = e.path();
  }
  if (files.empty()) Fail(ErrorCode::kIo, "no feat{K}.att.bin maps in " + maps_dir);
  std::vector<AttributionMap> maps;
  for (const auto& [k, p] : files) maps.push_back(ReadAttribution(p));
  const double thr = threshold < 0.0 ? DefaultPresenceThreshold(width) : threshold;
  const FeatureReport rep = MakeFeatureReport(maps, thr, bands, width);
  const fs::path target(out_path);
  Staging out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  WriteText(out.Path(target.filename().string()), rep.ToJson());
  out.Commit();
  log << "report over " << maps.size() << " maps\n";
  return kExitOk;
}

int CmdValidate(const std::string& model_name, uint64_t seed, const PathOptions& path,
                const std::string& out_path, std::ostream& log) {
  const Model model = ResolveModel(model_name);
  Lcg rng(seed);
  std::vector<float> v(static_cast<size_t>(NumElements(model.input_shape())));
  for (float& x : v) x = static_cast<float>(rng.Uniform());
  const Tensor input(model.input_shape(), std::move(v));
  const AxiomReport rep =
      RunAxiomReport(model, input, Tensor::Filled(model.input_shape(), 0.0f), path.Config(), seed);
  const fs::path target(out_path);
  Staging out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  WriteText(out.Path(target.filename().string()), rep.ToJson());
  out.Commit();
  size_t failed = 0;
  for (const AxiomEntry& e : rep.entries) failed += e.status == "fail";
  log << rep.entries.size() << " checks, " << failed << " failed\n";
  return rep.passed() ? kExitOk : kExitInvariantViolation;
}

int CmdRender(const std::string& att, const std::string& out_path, std::ostream& log) {
  const AttributionMap map = ReadAttribution(att);
  const fs::path target(out_path);
  Staging out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  RenderHeatmap(map, out.Path(target.filename().string()));
  out.Commit();
  log << "rendered " << ShapeToString(map.values.shape()) << "\n";
  return kExitOk;
}

int CmdGenModel(const std::string& preset, uint64_t seed, int64_t width, bool no_head,
                int64_t dim, const std::string& out_path, std::ostream& log) {
  std::optional<Model> model;
  if (preset == "nisqa-like") {
    model = MakeNisqaLikeModel(seed, {width, !no_head});
  } else if (preset == "linear") {
    Lcg rng(seed);
    std::vector<float> w(static_cast<size_t>(dim));
    for (float& x : w) x = static_cast<float>(rng.Uniform(-1.0, 1.0));
    const Model m = MakeLinearModel(w, static_cast<float>(rng.Uniform(-0.1, 0.1)));
    model = Model(m.input_shape(), m.layers(), std::nullopt, seed);
  } else {
    Fail(ErrorCode::kDomain, "unknown preset '" + preset + "'");
  }
  const fs::path target(out_path);
  Staging out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  SaveModelFile(*model, out.Path(target.filename().string()));
  out.Commit();
  log << "model with " << model->layer_count() << " layers, input "
      << ShapeToString(model->input_shape()) << "\n";
  return kExitOk;
}

int CmdGenSpec(int64_t frames, uint64_t seed, const std::string& format,
               const std::string& out_path, std::ostream& log) {
  if (frames < 1) Fail(ErrorCode::kDomain, "frames must be >= 1");
  Lcg rng(seed);
  std::vector<float> v(static_cast<size_t>(kSpectrogramHeight * frames));
  for (float& x : v) x = static_cast<float>(rng.Uniform());
  const Spectrogram spec(Tensor({1, kSpectrogramHeight, frames}, std::move(v)));
  const fs::path target(out_path);
  Staging out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  WriteSpectrogram(spec, out.Path(target.filename().string()),
                   format.empty() ? FileFormatFromPath(target) : ParseFileFormat(format));
  out.Commit();
  log << "spectrogram 48x" << frames << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribution toolkit for spectrogram CNN features", "specattr"};
  app.require_subcommand(1);

  Common common;
  PathOptions path;
  std::vector<std::string> targets;
  std::string baseline = "zero";

  std::string mask, stride;
  float fill = 0.0f;
  auto* occlusion = app.add_subcommand("occlusion", "sliding-mask occlusion sensitivity");
  AddCommon(occlusion, common, true);
  occlusion->add_option("--mask", mask, "mask HxW")->required();
  occlusion->add_option("--stride", stride, "stride HxW")->required();
  occlusion->add_option("--fill", fill, "mask fill value");
  occlusion->add_option("--target", targets, "feature:K, head or all");

  int64_t hop = 1;
  auto* ig = app.add_subcommand("ig", "integrated gradients");
  auto* deeplift = app.add_subcommand("deeplift", "DeepLIFT with the Rescale rule");
  for (CLI::App* cmd : {ig, deeplift}) {
    AddCommon(cmd, common, true);
    cmd->add_option("--baseline", baseline, "zero, const:V or file:P");
    cmd->add_option("--target", targets, "feature:K, head or all (default all features)");
    cmd->add_option("--hop", hop, "segment hop when the spectrogram is wider than the model")
        ->check(CLI::PositiveNumber);
  }
  AddPath(ig, path);

  size_t layer = 0;
  std::optional<int64_t> column;
  int64_t bands = 4;
  auto* conductance = app.add_subcommand("conductance", "conductance of a hidden layer");
  AddCommon(conductance, common, true);
  AddPath(conductance, path);
  conductance->add_option("--baseline", baseline, "zero, const:V or file:P");
  conductance->add_option("--target", targets, "feature:K or head");
  conductance->add_option("--layer", layer, "trace index of the explained layer")->required();
  conductance->add_option("--column", column, "segment centre column (default T/2)");
  conductance->add_option("--bands", bands, "band count of the region table");

  std::string method = "ig";
  int64_t width = 15;
  double threshold = -1.0;
  auto* pipeline = app.add_subcommand("pipeline", "segment, explain, average and report");
  AddCommon(pipeline, common, true);
  AddPath(pipeline, path);
  pipeline->add_option("--method", method, "ig or deeplift");
  pipeline->add_option("--baseline", baseline, "zero, const:V or file:P");
  pipeline->add_option("--width", width, "segment width (odd)");
  pipeline->add_option("--hop", hop, "segment hop")->check(CLI::PositiveNumber);
  pipeline->add_option("--threshold", threshold, "presence threshold (default 1e-6*48*W)");
  pipeline->add_option("--bands", bands, "band count");

  std::string maps_dir;
  auto* report = app.add_subcommand("report", "feature report over full maps");
  report->add_option("--maps", maps_dir, "directory holding feat{K}.att.bin")->required();
  report->add_option("--threshold", threshold, "presence threshold (default 1e-6*48*W)");
  report->add_option("--bands", bands, "band count");
  report->add_option("--width", width, "presence window in columns");
  report->add_option("--out", common.out, "report file")->required();

  uint64_t seed = 1;
  auto* validate = app.add_subcommand("validate", "axiom report");
  validate->add_option("--model", common.model, "model manifest or built-in name")->required();
  validate->add_option("--seed", seed, "seed of the probe input and fixtures");
  validate->add_option("--out", common.out, "report file")->required();
  AddPath(validate, path);

  std::string att;
  auto* render = app.add_subcommand("render", "render an ATT1 map as a PPM heatmap");
  render->add_option("--att", att, "ATT1 map")->required();
  render->add_option("--out", common.out, "PPM file")->required();

  std::string preset;
  bool no_head = false;
  int64_t dim = 2;
  auto* gen_model = app.add_subcommand("gen-model", "write a deterministic fixture model");
  gen_model->add_option("--preset", preset, "nisqa-like or linear")->required();
  gen_model->add_option("--seed", seed, "weight seed");
  gen_model->add_option("--width", width, "nisqa-like segment width");
  gen_model->add_flag("--no-head", no_head, "omit the dense head");
  gen_model->add_option("--dim", dim, "linear input size")->check(CLI::PositiveNumber);
  gen_model->add_option("--out", common.out, "manifest path")->required();

  int64_t frames = 1300;
  std::string format;
  auto* gen_spec = app.add_subcommand("gen-spec", "write a seeded random spectrogram");
  gen_spec->add_option("--frames", frames, "column count");
  gen_spec->add_option("--seed", seed, "seed");
  gen_spec->add_option("--format", format, "csv or bin (default: by extension)");
  gen_spec->add_option("--out", common.out, "spectrogram path")->required();

  std::vector<const char*> argv{"specattr"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (occlusion->parsed()) return CmdOcclusion(common, mask, stride, fill, targets, out);
    if (ig->parsed()) {
      return CmdExplain(Method::kIntegratedGradients, common, baseline, path, hop, targets, out);
    }
    if (deeplift->parsed()) {
      return CmdExplain(Method::kDeepLift, common, baseline, path, hop, targets, out);
    }
    if (conductance->parsed()) {
      return CmdConductance(common, baseline, path, layer, column, bands, targets, out);
    }
    if (pipeline->parsed()) {
      return CmdPipeline(common, method, baseline, path, width, hop, threshold, bands, out);
    }
    if (report->parsed()) return CmdReport(maps_dir, threshold, bands, width, common.out, out);
    if (validate->parsed()) return CmdValidate(common.model, seed, path, common.out, out);
    if (render->parsed()) return CmdRender(att, common.out, out);
    if (gen_model->parsed()) {
      return CmdGenModel(preset, seed, width, no_head, dim, common.out, out);
    }
    if (gen_spec->parsed()) return CmdGenSpec(frames, seed, format, common.out, out);
  } catch (const Error& e) {
    err << "specattr: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvariantViolation ? kExitInvariantViolation : kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "specattr: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "specattr: internal error: " << e.what() << "\n";
    return kExitInvariantViolation;
  }
  return kExitInputError;
}

}  // namespace specattr
