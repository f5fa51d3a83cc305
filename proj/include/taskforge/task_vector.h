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

#ifndef TASKFORGE_TASK_VECTOR_H_
#define TASKFORGE_TASK_VECTOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "taskforge/parameter_set.h"

namespace taskforge {

// Fine-tuned minus base weights, tagged with the task it came from.
struct TaskVector {
  ParameterSet delta;
  std::string task_label;
  uint64_t base_fingerprint = 0;
  bool disentangled = false;
};

// Metadata keys used when a task vector is stored as a checkpoint.
inline constexpr const char* kLabelKey = "taskforge.task_label";
inline constexpr const char* kBaseFingerprintKey = "taskforge.base_fingerprint";
inline constexpr const char* kDisentangledKey = "taskforge.disentangled";

ParameterSet ToCheckpoint(const TaskVector& tv);
// Label falls back to `fallback_label` when the checkpoint carries none.
TaskVector FromCheckpoint(ParameterSet ps, const std::string& fallback_label);

TaskVector Extract(const ParameterSet& finetuned, const ParameterSet& base, std::string label);

struct GlobalCoefficient {
  double lambda = 1.0;
};
struct PerTaskCoefficients {
  std::vector<double> lambdas;
};
struct PerTaskPerLayerCoefficients {
  std::vector<std::vector<double>> matrix;  // K rows, P columns
  std::vector<std::string> layer_names;     // P tensor names
};
using CoefficientSchedule =
    std::variant<GlobalCoefficient, PerTaskCoefficients, PerTaskPerLayerCoefficients>;

// Throws EmptyFamily, ScheduleDimensionMismatch or alignment errors.
ParameterSet Apply(const ParameterSet& base, std::span<const TaskVector> family,
                   const CoefficientSchedule& schedule);

// Throws EmptyFamily, or ShapeMismatch/MissingTensor when members disagree.
void ValidateFamily(std::span<const TaskVector> family);

double FlatDot(const TaskVector& a, const TaskVector& b);
double FlatNorm(const TaskVector& a);
// Clamped to [-1, 1]; throws ZeroVector naming the zero argument.
double Cosine(const TaskVector& a, const TaskVector& b);

TaskVector Scale(const TaskVector& v, double s);
TaskVector Add(const TaskVector& a, const TaskVector& b);
TaskVector Negate(const TaskVector& v);

struct SimilarityMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;

  std::string ToJson() const;
  std::string ToCsv() const;
  double MeanAbsOffDiagonal() const;
};

SimilarityMatrix ComputeSimilarityMatrix(std::span<const TaskVector> family);

// Diagnostic: cosine of one tensor's slice per task pair, keyed by tensor
// name. Pairs where either slice is zero report NaN.
struct TensorCosine {
  std::string tensor;
  size_t task_a;
  size_t task_b;
  double cosine;
};
std::vector<TensorCosine> PerTensorCosines(std::span<const TaskVector> family);

}  // namespace taskforge

#endif  // TASKFORGE_TASK_VECTOR_H_
