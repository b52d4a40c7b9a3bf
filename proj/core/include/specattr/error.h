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

#ifndef SPECATTR_ERROR_H_
#define SPECATTR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace specattr {

enum class ErrorCode {
  kShape,
  kDomain,
  kUnknownLayerKind,
  kWeightCountMismatch,
  kNonFiniteWeight,
  kTargetOutOfRange,
  kLayerOutOfRange,
  kMaskTooLarge,
  kMethodMismatch,
  kPositionOutOfRange,
  kFormat,
  kHeightNot48,
  kNonFiniteValue,
  kIo,
  // Broken internal invariant; never the caller's fault.
  kInvariantViolation,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. `code()`
// distinguishes input problems from internal invariant violations.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace specattr

#endif  // SPECATTR_ERROR_H_
