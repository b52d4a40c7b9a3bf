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

#ifndef SPECATTR_VALIDATE_H_
#define SPECATTR_VALIDATE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specattr/attrib.h"
#include "specattr/net.h"
#include "specattr/tensor.h"

namespace specattr {

inline constexpr double kFiniteDiffStep = 1e-3;
inline constexpr double kKinkTolerance = 1e-4;
inline constexpr double kGradientFloor = 1e-4;

// Central differences of the target w.r.t. trace entry `layer`, using only the
// double-precision forward pass. near_kink[i] is set when the probe x +- h*e_i
// moves a ReLU pre-activation that comes within kKinkTolerance of zero or
// changes sign, or moves a max-pool window whose winner changes or whose top
// two values are within kKinkTolerance.
struct FiniteDiffResult {
  std::vector<double> gradient;
  std::vector<uint8_t> near_kink;
};

FiniteDiffResult FiniteDiffOracle(const Model& model, std::span<const double> point,
                                  size_t layer, TargetSelector target,
                                  double h = kFiniteDiffStep, int threads = 1);

// Central-difference gradient w.r.t. the input. Throws DomainError when
// h <= 0, TargetOutOfRange, ShapeError.
Tensor FiniteDiffGradient(const Model& model, const Tensor& input, TargetSelector target,
                          double h = kFiniteDiffStep);

struct GradientComparison {
  double max_relative_error = 0.0;
  size_t compared = 0;
  size_t kink_excluded = 0;
  size_t below_floor = 0;
};

// Relative error |a - fd| / |a| over cells with |a| > floor that are not
// flagged near a kink.
GradientComparison CompareGradients(std::span<const double> analytic,
                                    const FiniteDiffResult& oracle,
                                    double floor = kGradientFloor);

// Closed-form attribution of x -> w.x + b: values_i = w_i (x_i - x'_i). The
// map is labelled as integrated gradients, which it equals exactly.
// Throws ShapeError.
AttributionMap LinearOracle(std::span<const float> weights, float bias, const Tensor& input,
                            const Tensor& baseline);

// Two functionally equivalent models on input [8]:
//   first:  dense W -> relu -> dense V
//   second: dense W1 -> dense W2 -> relu -> dense V,  W2 = W W1^-1
// with W1 a seeded, diagonally dominant (hence invertible) matrix.
std::pair<Model, Model> MakeEquivalentPair(uint64_t seed);

// Max |first(x) - second(x)| over `probes` seeded uniform inputs in [-1, 1].
double EquivalenceDiscrepancy(const Model& first, const Model& second, uint64_t seed,
                              int probes = 100);

// Input cells with no path of nonzero weights to `target`; a purely
// structural analysis that ignores activation patterns.
std::vector<size_t> StructurallyDeadInputs(const Model& model, TargetSelector target);

struct DeadInputFixture {
  std::string name;
  Model model;
  Tensor input;
  Tensor baseline;
  size_t conductance_layer = 0;
};

// A dense net with zeroed weight columns and a 1x1 stride-2 convolution that
// never reads odd rows or columns.
std::vector<DeadInputFixture> DeadInputFixtures(uint64_t seed);

// Stress fixtures: relu(x), 1 - relu(1 - x), relu(x - 1) and
// relu(1 - relu(1 - x1 - x2)).
Model ReluFixture();
Model ClampedReluFixture();
Model ThresholdFixture();
Model SaturationFixture();

struct AxiomEntry {
  std::string suite;
  std::string subject;
  std::string method;
  // "pass", "fail" or "exempt".
  std::string status;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomEntry> entries;

  // True when no entry has status "fail".
  bool passed() const;
  std::string ToJson() const;
};

// Completeness, sensitivity (a)/(b), implementation invariance, thresholding
// and saturation suites over `model` and the built-in fixtures. Failures are
// entries, never exceptions (bad arguments still throw).
AxiomReport RunAxiomReport(const Model& model, const Tensor& input, const Tensor& baseline,
                           const PathConfig& path, uint64_t seed = 1);

}  // namespace specattr

#endif  // SPECATTR_VALIDATE_H_
