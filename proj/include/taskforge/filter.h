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

#ifndef TASKFORGE_FILTER_H_
#define TASKFORGE_FILTER_H_

#include <string>
#include <vector>

#include "taskforge/parameter_set.h"

namespace taskforge {

enum class FilterMode { kKeepMatching, kDropMatching };

// Glob patterns (`*`, `?`, `[...]`) over tensor names. `*` also matches `.`.
struct FilterSpec {
  std::vector<std::string> patterns;
  FilterMode mode = FilterMode::kKeepMatching;

  // Keeps linear-layer weights only; bias vectors are dropped.
  static FilterSpec LinearWeights();

  // Throws InvalidFilter on an empty pattern list or an unterminated `[`.
  void Validate() const;
  bool Matches(const std::string& name) const;
};

bool GlobMatch(const std::string& pattern, const std::string& name);

// Returns the selected subset; an empty result is legal and logged to stderr.
ParameterSet FilterParameters(const ParameterSet& ps, const FilterSpec& filter);

}  // namespace taskforge

#endif  // TASKFORGE_FILTER_H_
