/* Copyright 2026 The BRAVO Evaluation Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bravo {

enum class ErrorCode {
  // pngio
  kNotPng,
  kWrongBitDepth,
  kWrongChannelCount,
  kCorruptFile,
  kIoFailure,
  kEncodingFailure,
  // metrics
  kRoleMapMismatch,
  kShapeMismatch,
  kEmptyEvaluation,
  kDegenerateClasses,
  kNoPositives,
  // aggregate
  kEmptyList,
  kMissingSubset,
  kDegenerateSubset,
  // tools / analysis
  kNonFiniteInput,
  kOutOfRange,
  kDegenerateVariance,
  kInvalidArgument,
  kValidationFailed,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPng: return "NotPng";
    case ErrorCode::kWrongBitDepth: return "WrongBitDepth";
    case ErrorCode::kWrongChannelCount: return "WrongChannelCount";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kEncodingFailure: return "EncodingFailure";
    case ErrorCode::kRoleMapMismatch: return "RoleMapMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kDegenerateClasses: return "DegenerateClasses";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kMissingSubset: return "MissingSubset";
    case ErrorCode::kDegenerateSubset: return "DegenerateSubset";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

// All library failures are reported through this exception; `code()` is the
// stable, machine-checkable part and `what()` carries context (paths, names).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bravo
