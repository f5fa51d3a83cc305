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

#ifndef TASKFORGE_AWD_SOLVER_H_
#define TASKFORGE_AWD_SOLVER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskforge/parameter_set.h"
#include "taskforge/task_vector.h"

namespace taskforge {

// Shared vector removed from every task vector of a family. Kept in f64;
// narrowed to f32 only when disentangling or saving.
struct RedundantVector {
  std::shared_ptr<const Layout> layout;
  std::vector<double> values;
  uint64_t family_fingerprint = 0;

  static RedundantVector Zeros(std::span<const TaskVector> family);
  ParameterSet ToParameterSet() const;
};

uint64_t FamilyFingerprint(std::span<const TaskVector> family);

struct SolverConfig {
  int64_t steps = 1000;
  double learning_rate = 1e-4;
  double alpha = 1e-4;
  int64_t log_every = 10;
  uint64_t seed = 0;  // provenance only; the solver is deterministic

  void Validate() const;
  nlohmann::json ToJson() const;
};

struct TraceRecord {
  int64_t step;
  double orthogonality_loss;
  double invariance_loss;
  double total_loss;
  double grad_norm;
  double mean_abs_cos;
};

struct SolverTrace {
  std::vector<TraceRecord> records;

  std::string ToCsv() const;
};

struct LossBreakdown {
  double total;
  double orthogonality;
  double invariance;
};

struct SolveResult {
  RedundantVector delta;
  SolverTrace trace;
  LossBreakdown final_loss{};
  int64_t steps_completed = 0;
  // Set when a step produced a non-finite loss or gradient; `delta` then holds
  // the last finite iterate.
  bool diverged = false;
  std::string message;

  // {family labels, config, final losses}
  nlohmann::json Sidecar(std::span<const TaskVector> family, const SolverConfig& config) const;
};

// Mean |cosine| over ordered pairs of (tau_i - delta). Throws TooFewTasks or
// DegenerateVector.
double OrthogonalityLoss(std::span<const TaskVector> family, const RedundantVector& delta);
double InvarianceLoss(const RedundantVector& delta);
LossBreakdown TotalLoss(std::span<const TaskVector> family, const RedundantVector& delta,
                        double alpha);

// Analytic gradient of TotalLoss with respect to delta. |.| uses sign(0) = 0
// and the norm term has subgradient 0 at delta = 0.
RedundantVector LossGradient(std::span<const TaskVector> family, const RedundantVector& delta,
                             double alpha);

// Plain gradient descent from delta = 0.
SolveResult Solve(std::span<const TaskVector> family, const SolverConfig& config);

std::vector<TaskVector> Disentangle(std::span<const TaskVector> family, const RedundantVector& delta);

namespace awd_internal {

// Orthogonality loss and per-task gradient weights from the K x K Gram
// matrix of the disentangled vectors; the L_O gradient is
// sum_i weights[i] * (tau_i - delta).
struct PairTerms {
  double orthogonality_loss = 0.0;
  std::vector<double> weights;
  int degenerate = -1;  // index of a zero/non-finite vector, or -1
};
PairTerms ComputePairTerms(size_t k, std::span<const double> gram);

}  // namespace awd_internal

}  // namespace taskforge

#endif  // TASKFORGE_AWD_SOLVER_H_
