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

#ifndef TASKFORGE_MERGE_H_
#define TASKFORGE_MERGE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskforge/awd_solver.h"
#include "taskforge/parameter_set.h"
#include "taskforge/task_vector.h"

namespace taskforge {

enum class MergeMethod { kAverage, kTaskArithmetic, kTies, kDareTaskArithmetic, kAwdTaskArithmetic };

std::string MethodName(MergeMethod m);
// Throws InvalidConfig for unknown names.
MergeMethod ParseMethod(const std::string& name);

struct MergeConfig {
  MergeMethod method = MergeMethod::kTaskArithmetic;
  CoefficientSchedule schedule = GlobalCoefficient{0.3};
  double ties_trim_fraction = 0.2;  // fraction of entries kept per task
  bool ties_per_tensor = false;
  double dare_drop_rate = 0.5;
  uint64_t rng_seed = 0;
  std::optional<SolverConfig> awd;

  void Validate() const;
  nlohmann::json ToJson() const;
};

ParameterSet WeightAverage(std::span<const ParameterSet> models);

ParameterSet TaskArithmetic(const ParameterSet& base, std::span<const TaskVector> family,
                            double lambda);

// Trim to the top ceil(k * d) magnitudes per task (ties broken toward the
// lower flat index), elect the sign of the summed survivors per coordinate,
// average the survivors that agree with it. A zero sum yields 0.
ParameterSet TiesMerge(const ParameterSet& base, std::span<const TaskVector> family,
                       double trim_fraction, double lambda, bool per_tensor = false);

// Keep mask for one vector, exposed for tests.
std::vector<uint8_t> TopMagnitudeMask(std::span<const float> v, double trim_fraction);

// Drop each entry with probability p and rescale survivors by 1/(1-p). The
// decision for entry x of task t depends only on (seed, t, x).
std::vector<TaskVector> DarePreprocess(std::span<const TaskVector> family, double drop_rate,
                                       uint64_t seed);

// Uniform in [0, 1) from a counter-based hash of the key triple.
double KeyedUniform(uint64_t seed, uint64_t stream, uint64_t counter);

struct AwdMergeResult {
  ParameterSet merged;
  SolveResult solve;
};
AwdMergeResult AwdTaskArithmetic(const ParameterSet& base, std::span<const TaskVector> family,
                                 double lambda, const SolverConfig& solver);

ParameterSet LayerwiseApply(const ParameterSet& base, std::span<const TaskVector> family,
                            const PerTaskPerLayerCoefficients& schedule);

struct MergeOutcome {
  ParameterSet merged;
  std::optional<SolveResult> awd;
};

// Dispatches on config.method. For kAverage `models` are averaged and
// `base`/`family` are ignored; every other method uses the task vectors.
MergeOutcome RunMerge(const MergeConfig& config, const ParameterSet* base,
                      std::span<const TaskVector> family, std::span<const ParameterSet> models);

}  // namespace taskforge

#endif  // TASKFORGE_MERGE_H_
