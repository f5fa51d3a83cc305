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

#ifndef TASKFORGE_SAFETENSORS_H_
#define TASKFORGE_SAFETENSORS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "taskforge/parameter_set.h"

namespace taskforge {

struct LoadOptions {
  // Drop integer/bool tensors instead of failing with UnsupportedDtype.
  bool skip_non_float = false;
  bool allow_nonfinite = false;
};

// Reads a safetensors container. F32 is copied, F16/BF16 are widened exactly,
// F64 is narrowed with round-to-nearest. "__metadata__" lands in
// ParameterSet::metadata().
ParameterSet LoadCheckpoint(const std::filesystem::path& path, const LoadOptions& options = {});
ParameterSet ParseCheckpoint(const std::vector<uint8_t>& bytes, const LoadOptions& options = {});

// Always writes F32, tensors in lexicographic order, header padded with
// spaces to a multiple of 8 bytes.
void SaveCheckpoint(const ParameterSet& ps, const std::filesystem::path& path);
std::vector<uint8_t> SerializeCheckpoint(const ParameterSet& ps);

float HalfToFloat(uint16_t bits);
float BFloat16ToFloat(uint16_t bits);

}  // namespace taskforge

#endif  // TASKFORGE_SAFETENSORS_H_
