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

#include "taskforge/score.h"

#include <cmath>

#include "taskforge/error.h"

namespace taskforge {

ScoreReport NormalizedScore(std::span<const double> merged, std::span<const double> reference,
                            std::vector<std::string> labels) {
  if (merged.empty()) throw Error(ErrorCode::kInvalidConfig, "no scores given");
  if (merged.size() != reference.size()) {
    throw Error(ErrorCode::kInvalidConfig, "merged and reference score counts differ");
  }
  if (!labels.empty() && labels.size() != merged.size()) {
    throw Error(ErrorCode::kInvalidConfig, "label count differs from score count");
  }
  ScoreReport r;
  if (labels.empty()) {
    for (size_t i = 0; i < merged.size(); ++i) labels.push_back("task" + std::to_string(i));
  }
  r.labels = std::move(labels);
  r.merged.assign(merged.begin(), merged.end());
  r.reference.assign(reference.begin(), reference.end());
  double acc = 0.0;
  for (size_t i = 0; i < merged.size(); ++i) {
    if (!(reference[i] > 0.0) || !std::isfinite(reference[i])) {
      throw Error(ErrorCode::kNonPositiveReference,
                  "reference score for '" + r.labels[i] + "' must be positive", r.labels[i]);
    }
    r.ratios.push_back(merged[i] / reference[i]);
    acc += r.ratios.back();
  }
  r.mean = acc / static_cast<double>(merged.size());
  return r;
}

nlohmann::json ScoreReport::ToJson() const {
  return {{"labels", labels}, {"merged", merged}, {"reference", reference},
          {"ratios", ratios}, {"normalized_score", mean}};
}

}  // namespace taskforge
