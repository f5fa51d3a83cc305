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

#ifndef TASKFORGE_SCORE_H_
#define TASKFORGE_SCORE_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace taskforge {

// Merged-model scores relative to the individually fine-tuned models.
struct ScoreReport {
  std::vector<std::string> labels;
  std::vector<double> merged;
  std::vector<double> reference;
  std::vector<double> ratios;
  double mean = 0.0;

  nlohmann::json ToJson() const;
};

// mean_i merged[i] / reference[i]. Throws NonPositiveReference when a
// reference score is <= 0, InvalidConfig on length mismatch or K = 0.
ScoreReport NormalizedScore(std::span<const double> merged, std::span<const double> reference,
                            std::vector<std::string> labels = {});

}  // namespace taskforge

#endif  // TASKFORGE_SCORE_H_
