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

#include "specattr/error.h"

namespace specattr {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape:
      return "ShapeError";
    case ErrorCode::kDomain:
      return "DomainError";
    case ErrorCode::kUnknownLayerKind:
      return "UnknownLayerKind";
    case ErrorCode::kWeightCountMismatch:
      return "WeightCountMismatch";
    case ErrorCode::kNonFiniteWeight:
      return "NonFiniteWeight";
    case ErrorCode::kTargetOutOfRange:
      return "TargetOutOfRange";
    case ErrorCode::kLayerOutOfRange:
      return "LayerOutOfRange";
    case ErrorCode::kMaskTooLarge:
      return "MaskTooLarge";
    case ErrorCode::kMethodMismatch:
      return "MethodMismatch";
    case ErrorCode::kPositionOutOfRange:
      return "PositionOutOfRange";
    case ErrorCode::kFormat:
      return "FormatError";
    case ErrorCode::kHeightNot48:
      return "HeightNot48";
    case ErrorCode::kNonFiniteValue:
      return "NonFiniteValue";
    case ErrorCode::kIo:
      return "IoError";
    case ErrorCode::kInvariantViolation:
      return "InvariantViolation";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace specattr
