// Copyright 2026 The Taskforge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "taskforge/error.h"

namespace taskforge {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kTruncatedData: return "TruncatedData";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingTensor: return "MissingTensor";
    case ErrorCode::kInvalidFilter: return "InvalidFilter";
    case ErrorCode::kEmptyFamily: return "EmptyFamily";
    case ErrorCode::kScheduleDimensionMismatch: return "ScheduleDimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kTooFewTasks: return "TooFewTasks";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kNumericalDivergence: return "NumericalDivergence";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidTrimFraction: return "InvalidTrimFraction";
    case ErrorCode::kInvalidDropRate: return "InvalidDropRate";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kNonPositiveReference: return "NonPositiveReference";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace taskforge
