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

#ifndef TASKFORGE_QUADRATIC_H_
#define TASKFORGE_QUADRATIC_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskforge/awd_solver.h"

// Analytic multi-task landscapes L_i(x) = 1/2 (x - x_i*)^T A_i (x - x_i*),
// on which every Taylor term of the merging-gap analysis is exact.
namespace taskforge::theory {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct QuadraticTask {
  Matrix hessian;
  Vector optimum;
  std::string label;

  Eigen::Index dim() const { return optimum.size(); }
};

QuadraticTask IdentityTask(Vector optimum, std::string label = {});
// Hessian M^T M with M entries drawn from N(0, 1/d), so eigenvalues are O(1).
Matrix RandomPsdHessian(Eigen::Index dim, uint64_t seed);
Vector RandomGaussianVector(Eigen::Index dim, uint64_t seed, double stddev = 1.0);

// Throws DimMismatch.
double Loss(const QuadraticTask& task, const Vector& theta);
Vector Gradient(const QuadraticTask& task, const Vector& theta);

struct ToyExperiment {
  Vector base;
  std::vector<QuadraticTask> tasks;
  std::vector<Vector> task_vectors;
  std::vector<double> lambdas;

  size_t size() const { return tasks.size(); }
  // Checks dims and counts; throws DimMismatch or InvalidConfig.
  void Validate() const;
};

// task_vectors[i] = optimum_i - base.
ToyExperiment MakeExperiment(Vector base, std::vector<QuadraticTask> tasks, std::vector<double> lambdas);

// JSON form:
//   {dim, seed, base?: [..], shared_drift?: s,
//    tasks: [{label?, hessian: "identity"|"random"|[[..]], optimum: [..]|"random",
//             task_vector?: [..]}],
//    lambdas?: [..]}
// `shared_drift` adds one seeded random vector of norm s to every derived task
// vector, giving a correlated family whose shared part no task needs.
ToyExperiment ExperimentFromJson(const nlohmann::json& config);
ToyExperiment LoadExperiment(const std::filesystem::path& path);

// L_i(base + sum_j l_j tau_j) - L_i(base + l_i tau_i)
double MergingGapExact(const ToyExperiment& exp, size_t i);
// sum_{j != i} l_j <grad L_i(base), tau_j>
double MergingGapFirstOrder(const ToyExperiment& exp, size_t i);
// k_i sum_{j != i} l_j <tau_i, tau_j>; throws InvalidK unless k_i < 0.
double MergingGapProxy(const ToyExperiment& exp, size_t i, double k_i = -1.0);

struct ReplacementGap {
  double exact;  // L_i(base + tau_i - delta) - L_i(base + tau_i)
  double bound;  // ||grad L_i(base)|| * ||delta||
};
ReplacementGap ComputeReplacementGap(const ToyExperiment& exp, size_t i, const Vector& delta);

struct GridPoint {
  double lambda_i;
  double lambda_j;
  double loss;  // L_i + L_j
};
// resolution x resolution grid over [lo, hi]^2 at base + l1 v_i + l2 v_j,
// where v = tau - delta (delta empty means the original vectors). Row-major
// with lambda_i as the slow index.
std::vector<GridPoint> LandscapeGrid(const ToyExperiment& exp, size_t i, size_t j, double lo,
                                     double hi, size_t resolution, const Vector& delta = {});

enum class SweepMethod { kTaskArithmetic, kAwdTaskArithmetic };

struct SweepPoint {
  double lambda;
  double summed_loss;
};

// Disentangled toy vectors: AWD on the f32 image of the task vectors, then
// tau_i - delta in f64.
std::vector<Vector> DisentangleToy(const ToyExperiment& exp, const SolverConfig& solver,
                                   SolveResult* solve_out = nullptr);

std::vector<SweepPoint> CoefficientSweep(const ToyExperiment& exp, const std::vector<double>& lambdas,
                                         SweepMethod method, const SolverConfig& solver = {});

double SummedLoss(const ToyExperiment& exp, const Vector& theta);

}  // namespace taskforge::theory

#endif  // TASKFORGE_QUADRATIC_H_
