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

#include "taskforge/quadratic.h"

#include <random>

#include "taskforge/error.h"
#include "taskforge/report.h"

namespace taskforge::theory {
namespace {

void CheckDim(const QuadraticTask& task, const Vector& theta) {
  if (theta.size() != task.dim()) {
    throw Error(ErrorCode::kDimMismatch, "point has dimension " + std::to_string(theta.size()) +
                                             ", task '" + task.label + "' has " +
                                             std::to_string(task.dim()));
  }
}

void CheckIndex(const ToyExperiment& exp, size_t i) {
  if (i >= exp.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "task index " + std::to_string(i) + " out of range for " + std::to_string(exp.size()) + " tasks");
  }
}

Vector JsonVector(const nlohmann::json& j, Eigen::Index dim, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw Error(ErrorCode::kDimMismatch, std::string(what) + " must be an array of length " + std::to_string(dim));
  }
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = j[static_cast<size_t>(k)].get<double>();
  return v;
}

// Per-task seeds derived from the experiment seed so adding tasks does not
// reshuffle earlier ones.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream, uint64_t index) {
  return seed * 0x9e3779b97f4a7c15ULL + stream * 1000003ULL + index;
}

}  // namespace

QuadraticTask IdentityTask(Vector optimum, std::string label) {
  const auto d = optimum.size();
  return QuadraticTask{Matrix::Identity(d, d), std::move(optimum), std::move(label)};
}

Matrix RandomPsdHessian(Eigen::Index dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = normal(rng);
  }
  Matrix a = m.transpose() * m;
  return 0.5 * (a + a.transpose());
}

Vector RandomGaussianVector(Eigen::Index dim, uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

double Loss(const QuadraticTask& task, const Vector& theta) {
  CheckDim(task, theta);
  const Vector r = theta - task.optimum;
  return 0.5 * r.dot(task.hessian * r);
}

Vector Gradient(const QuadraticTask& task, const Vector& theta) {
  CheckDim(task, theta);
  return task.hessian * (theta - task.optimum);
}

void ToyExperiment::Validate() const {
  if (tasks.empty()) throw Error(ErrorCode::kInvalidConfig, "experiment has no tasks");
  if (task_vectors.size() != tasks.size() || lambdas.size() != tasks.size()) {
    throw Error(ErrorCode::kInvalidConfig, "tasks, task vectors and lambdas differ in count");
  }
  const auto d = base.size();
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].dim() != d || task_vectors[i].size() != d || tasks[i].hessian.rows() != d ||
        tasks[i].hessian.cols() != d) {
      throw Error(ErrorCode::kDimMismatch, "task " + std::to_string(i) + " has inconsistent dimensions");
    }
  }
}

ToyExperiment MakeExperiment(Vector base, std::vector<QuadraticTask> tasks, std::vector<double> lambdas) {
  ToyExperiment exp;
  for (const auto& t : tasks) exp.task_vectors.push_back(t.optimum - base);
  exp.base = std::move(base);
  exp.tasks = std::move(tasks);
  exp.lambdas = std::move(lambdas);
  exp.Validate();
  return exp;
}

ToyExperiment ExperimentFromJson(const nlohmann::json& config) {
  try {
    const auto dim = config.at("dim").get<Eigen::Index>();
    if (dim < 1) throw Error(ErrorCode::kInvalidConfig, "dim must be positive");
    const auto seed = config.value("seed", uint64_t{0});
    const auto& jtasks = config.at("tasks");
    if (!jtasks.is_array() || jtasks.empty()) throw Error(ErrorCode::kInvalidConfig, "tasks must be a non-empty array");

    ToyExperiment exp;
    exp.base = config.contains("base") ? JsonVector(config["base"], dim, "base") : Vector::Zero(dim);
    Vector drift = Vector::Zero(dim);
    if (config.contains("shared_drift")) {
      const double s = config["shared_drift"].get<double>();
      drift = RandomGaussianVector(dim, DeriveSeed(seed, 3, 0));
      drift *= s / drift.norm();
    }
    for (size_t i = 0; i < jtasks.size(); ++i) {
      const auto& jt = jtasks[i];
      QuadraticTask task;
      task.label = jt.value("label", "task" + std::to_string(i));
      const auto& jh = jt.at("hessian");
      if (jh.is_string() && jh == "identity") {
        task.hessian = Matrix::Identity(dim, dim);
      } else if (jh.is_string() && jh == "random") {
        task.hessian = RandomPsdHessian(dim, DeriveSeed(seed, 1, i));
      } else if (jh.is_array() && static_cast<Eigen::Index>(jh.size()) == dim) {
        task.hessian.resize(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r) task.hessian.row(r) = JsonVector(jh[static_cast<size_t>(r)], dim, "hessian row");
      } else {
        throw Error(ErrorCode::kInvalidConfig, "hessian must be \"identity\", \"random\" or a dim x dim array");
      }
      const auto& jo = jt.at("optimum");
      task.optimum = (jo.is_string() && jo == "random") ? RandomGaussianVector(dim, DeriveSeed(seed, 2, i))
                                                        : JsonVector(jo, dim, "optimum");
      exp.task_vectors.push_back(jt.contains("task_vector")
                                     ? JsonVector(jt["task_vector"], dim, "task_vector")
                                     : Vector(task.optimum - exp.base + drift));
      exp.tasks.push_back(std::move(task));
    }
    if (config.contains("lambdas")) {
      exp.lambdas = config["lambdas"].get<std::vector<double>>();
    } else {
      exp.lambdas.assign(exp.tasks.size(), 1.0);
    }
    exp.Validate();
    return exp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("toy config: ") + e.what());
  }
}

ToyExperiment LoadExperiment(const std::filesystem::path& path) {
  return ExperimentFromJson(ReadJsonFile(path));
}

double MergingGapExact(const ToyExperiment& exp, size_t i) {
  CheckIndex(exp, i);
  Vector merged = exp.base;
  for (size_t j = 0; j < exp.size(); ++j) merged += exp.lambdas[j] * exp.task_vectors[j];
  const Vector single = exp.base + exp.lambdas[i] * exp.task_vectors[i];
  return Loss(exp.tasks[i], merged) - Loss(exp.tasks[i], single);
}

double MergingGapFirstOrder(const ToyExperiment& exp, size_t i) {
  CheckIndex(exp, i);
  const Vector g = Gradient(exp.tasks[i], exp.base);
  double acc = 0.0;
  for (size_t j = 0; j < exp.size(); ++j) {
    if (j != i) acc += exp.lambdas[j] * g.dot(exp.task_vectors[j]);
  }
  return acc;
}

double MergingGapProxy(const ToyExperiment& exp, size_t i, double k_i) {
  CheckIndex(exp, i);
  if (!(k_i < 0.0)) throw Error(ErrorCode::kInvalidK, "k_i must be negative");
  double acc = 0.0;
  for (size_t j = 0; j < exp.size(); ++j) {
    if (j != i) acc += exp.lambdas[j] * exp.task_vectors[i].dot(exp.task_vectors[j]);
  }
  return k_i * acc;
}

ReplacementGap ComputeReplacementGap(const ToyExperiment& exp, size_t i, const Vector& delta) {
  CheckIndex(exp, i);
  const QuadraticTask& t = exp.tasks[i];
  CheckDim(t, delta);
  const Vector full = exp.base + exp.task_vectors[i];
  return {Loss(t, full - delta) - Loss(t, full), Gradient(t, exp.base).norm() * delta.norm()};
}

std::vector<GridPoint> LandscapeGrid(const ToyExperiment& exp, size_t i, size_t j, double lo,
                                     double hi, size_t resolution, const Vector& delta) {
  CheckIndex(exp, i);
  CheckIndex(exp, j);
  if (resolution < 2) throw Error(ErrorCode::kInvalidConfig, "grid resolution must be >= 2");
  Vector vi = exp.task_vectors[i];
  Vector vj = exp.task_vectors[j];
  if (delta.size() > 0) {
    CheckDim(exp.tasks[i], delta);
    vi -= delta;
    vj -= delta;
  }
  const double step = (hi - lo) / static_cast<double>(resolution - 1);
  std::vector<GridPoint> out(resolution * resolution);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(resolution); ++r) {
    const double li = lo + step * static_cast<double>(r);
    for (size_t c = 0; c < resolution; ++c) {
      const double lj = lo + step * static_cast<double>(c);
      const Vector theta = exp.base + li * vi + lj * vj;
      out[static_cast<size_t>(r) * resolution + c] = {li, lj, Loss(exp.tasks[i], theta) + Loss(exp.tasks[j], theta)};
    }
  }
  return out;
}

double SummedLoss(const ToyExperiment& exp, const Vector& theta) {
  double acc = 0.0;
  for (const auto& t : exp.tasks) acc += Loss(t, theta);
  return acc;
}

std::vector<Vector> DisentangleToy(const ToyExperiment& exp, const SolverConfig& solver,
                                   SolveResult* solve_out) {
  exp.Validate();
  const auto d = exp.base.size();
  auto layout = Layout::Make({{"theta", Shape{static_cast<int64_t>(d)}}});
  std::vector<TaskVector> family;
  for (size_t i = 0; i < exp.size(); ++i) {
    std::vector<float> data(static_cast<size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) data[static_cast<size_t>(k)] = static_cast<float>(exp.task_vectors[i][k]);
    family.push_back({ParameterSet(layout, std::move(data)), exp.tasks[i].label, layout->fingerprint(), false});
  }
  SolveResult solved = Solve(family, solver);
  if (solved.diverged) throw Error(ErrorCode::kNumericalDivergence, solved.message);
  const Eigen::Map<const Vector> delta(solved.delta.values.data(), d);
  std::vector<Vector> out;
  for (const auto& tv : exp.task_vectors) out.push_back(tv - delta);
  if (solve_out != nullptr) *solve_out = std::move(solved);
  return out;
}

std::vector<SweepPoint> CoefficientSweep(const ToyExperiment& exp, const std::vector<double>& lambdas,
                                         SweepMethod method, const SolverConfig& solver) {
  if (lambdas.empty()) throw Error(ErrorCode::kInvalidConfig, "coefficient list is empty");
  exp.Validate();
  const std::vector<Vector> vectors =
      method == SweepMethod::kTaskArithmetic ? exp.task_vectors : DisentangleToy(exp, solver);
  Vector sum = Vector::Zero(exp.base.size());
  for (const auto& v : vectors) sum += v;
  std::vector<SweepPoint> out;
  for (double l : lambdas) out.push_back({l, SummedLoss(exp, exp.base + l * sum)});
  return out;
}

}  // namespace taskforge::theory
