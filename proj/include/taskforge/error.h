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

#ifndef TASKFORGE_ERROR_H_
#define TASKFORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskforge {

enum class ErrorCode {
  kIo,
  kMalformedHeader,
  kUnsupportedDtype,
  kTruncatedData,
  kNonFinite,
  kShapeMismatch,
  kMissingTensor,
  kInvalidFilter,
  kEmptyFamily,
  kScheduleDimensionMismatch,
  kZeroVector,
  kTooFewTasks,
  kDegenerateVector,
  kNumericalDivergence,
  kInvalidConfig,
  kInvalidTrimFraction,
  kInvalidDropRate,
  kDimMismatch,
  kIndexOutOfRange,
  kInvalidK,
  kNonPositiveReference,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library surface as this exception. `subject`
// names the offending entity (tensor name, task label, ...) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {});

  ErrorCode code() const { return code_; }
  const std::string& subject() const { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace taskforge

#endif  // TASKFORGE_ERROR_H_
