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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "specattr/formats.h"
#include "specattr/model_io.h"
#include "specattr/presets.h"
#include "test_util.h"

namespace specattr {
namespace {

namespace fs = std::filesystem;
using ::specattr::testing::RandomTensor;
using ::specattr::testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string Spec(const TempDir& dir, int64_t frames, uint64_t seed) {
  const fs::path p = dir / ("spec" + std::to_string(frames) + ".bin");
  WriteSpectrogram(Spectrogram(RandomTensor({1, 48, frames}, seed)), p, FileFormat::kBin);
  return p.string();
}

TEST(CliTest, OcclusionGridHas110Entries) {
  TempDir dir;
  const std::string spec = Spec(dir, 1300, 1);
  const CliRun r = Cli({"occlusion", "--spec", spec, "--model", "nisqa-like", "--mask", "24x24",
                     "--stride", "24x24", "--out", (dir / "occ").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto grid = nlohmann::json::parse(Slurp(dir / "occ" / "head.occlusion.grid.json"));
  EXPECT_EQ(grid.at("evaluations"), 110);
  EXPECT_EQ(grid.at("influence").size(), 110u);
  const AttributionMap map = ReadAttribution(dir / "occ" / "head.occlusion.att.bin");
  EXPECT_EQ(map.values.shape(), (Shape{1, 48, 1300}));
  EXPECT_TRUE(fs::exists(dir / "occ" / "head.occlusion.ppm"));
}

TEST(CliTest, ValidateLinearFixture) {
  TempDir dir;
  const CliRun r = Cli({"validate", "--model", "linear-fixture", "--out", (dir / "r.json").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(Slurp(dir / "r.json"));
  EXPECT_EQ(doc.at("passed"), true);
}

TEST(CliTest, InputErrorsExitOneWithoutOutput) {
  TempDir dir;
  const std::string out = (dir / "o").string();
  EXPECT_EQ(Cli({"ig", "--spec", (dir / "nope.bin").string(), "--model", "nisqa-like", "--out", out}).code,
            kExitInputError);
  const std::string spec = Spec(dir, 20, 2);
  EXPECT_EQ(Cli({"occlusion", "--spec", spec, "--model", "nisqa-like", "--mask", "60x4",
                 "--stride", "4x4", "--out", out}).code,
            kExitInputError);
  EXPECT_EQ(Cli({"ig", "--spec", spec, "--model", "nisqa-like", "--baseline", "bogus", "--out", out}).code,
            kExitInputError);
  EXPECT_EQ(Cli({"ig", "--spec", spec, "--model", "no-such-model", "--out", out}).code,
            kExitInputError);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitInputError);
  EXPECT_EQ(Cli({}).code, kExitInputError);
  EXPECT_FALSE(fs::exists(out));
  for (const auto& e : fs::directory_iterator(dir.path())) {
    EXPECT_EQ(e.path().filename().string().find(".staging"), std::string::npos) << e.path();
  }
}

TEST(CliTest, GenModelRoundTripsAndIgWritesFeatureMaps) {
  TempDir dir;
  const fs::path manifest = dir / "m.json";
  ASSERT_EQ(Cli({"gen-model", "--preset", "nisqa-like", "--seed", "5", "--out", manifest.string()}).code,
            kExitOk);
  const Model m = LoadModelFile(manifest);
  const Model ref = MakeNisqaLikeModel(5);
  for (size_t l = 0; l < ref.layer_count(); ++l) EXPECT_EQ(m.layers()[l].weights, ref.layers()[l].weights);

  const std::string spec = Spec(dir, 15, 3);
  const CliRun r = Cli({"ig", "--spec", spec, "--model", manifest.string(), "--steps", "8",
                     "--target", "feature:2", "--out", (dir / "ig").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const AttributionMap got = ReadAttribution(dir / "ig" / "feat2.att.bin");
  const AttributionMap want =
      IntegratedGradients(ref, ReadSpectrogram(spec, FileFormat::kBin).values(),
                          Tensor::Filled({1, 48, 15}, 0.0f), TargetSelector::Feature(2), {8});
  EXPECT_TRUE(got.values.BitwiseEquals(want.values));
  EXPECT_TRUE(fs::exists(dir / "ig" / "feat2.ppm"));
}

TEST(CliTest, PipelineOutputIndependentOfThreads) {
  TempDir dir;
  const std::string spec = Spec(dir, 40, 4);
  for (const char* t : {"1", "4"}) {
    const CliRun r = Cli({"pipeline", "--spec", spec, "--model", "nisqa-like", "--method", "ig",
                       "--steps", "4", "--threads", t, "--out", (dir / ("p" + std::string(t))).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "p1")) {
    ++files;
    EXPECT_EQ(Slurp(e.path()), Slurp(dir / "p4" / e.path().filename())) << e.path();
  }
  EXPECT_EQ(files, 41u);

  const CliRun rep = Cli({"report", "--maps", (dir / "p1").string(), "--out", (dir / "rep.json").string()});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_EQ(Slurp(dir / "rep.json"), Slurp(dir / "p1" / "report.json"));
}

TEST(CliTest, RenderMatchesLibrary) {
  TempDir dir;
  AttributionMap m;
  m.values = RandomTensor({1, 48, 6}, 7, -1, 1);
  WriteAttribution(m, dir / "a.att.bin", FileFormat::kBin);
  ASSERT_EQ(Cli({"render", "--att", (dir / "a.att.bin").string(), "--out", (dir / "a.ppm").string()}).code,
            kExitOk);
  const std::vector<std::byte> want = EncodePpm(RenderHeatmapImage(m));
  EXPECT_EQ(Slurp(dir / "a.ppm"), std::string(reinterpret_cast<const char*>(want.data()), want.size()));
}

TEST(CliTest, ConductanceWritesRegions) {
  TempDir dir;
  const std::string spec = Spec(dir, 15, 8);
  const CliRun r = Cli({"conductance", "--spec", spec, "--model", "nisqa-like:7", "--layer", "1",
                     "--steps", "16", "--out", (dir / "c").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(Slurp(dir / "c" / "head.layer1.regions.json"));
  EXPECT_TRUE(doc.dump().find("inactive") != std::string::npos);
  EXPECT_EQ(ReadAttribution(dir / "c" / "head.layer1.att.bin").layer, 1u);
  EXPECT_EQ(Cli({"conductance", "--spec", spec, "--model", "nisqa-like", "--layer", "42",
                 "--out", (dir / "bad").string()}).code,
            kExitInputError);
}

}  // namespace
}  // namespace specattr
