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

#include "taskforge/awd_solver.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "taskforge/error.h"
#include "taskforge/kernels.h"
#include "taskforge/report.h"

namespace taskforge {
namespace {

std::vector<std::span<const float>> Spans(std::span<const TaskVector> family) {
  std::vector<std::span<const float>> out;
  out.reserve(family.size());
  for (const auto& tv : family) out.push_back(tv.delta.flat());
  return out;
}

double Sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

void RequirePairs(std::span<const TaskVector> family) {
  if (family.size() < 2) {
    throw Error(ErrorCode::kTooFewTasks, "disentangling needs at least two task vectors");
  }
  ValidateFamily(family);
}

void RequireMatchingDelta(std::span<const TaskVector> family, const RedundantVector& delta) {
  ValidateAligned(family[0].delta.layout(), *delta.layout);
}

[[noreturn]] void ThrowDegenerate(std::span<const TaskVector> family, int index) {
  const std::string& label = family[static_cast<size_t>(index)].task_label;
  throw Error(ErrorCode::kDegenerateVector,
              "disentangled vector for '" + label + "' is zero or non-finite", label);
}

awd_internal::PairTerms DirectTerms(std::span<const TaskVector> family, const RedundantVector& delta) {
  RequirePairs(family);
  RequireMatchingDelta(family, delta);
  const size_t k = family.size();
  std::vector<double> gram(k * k);
  kernels::ShiftedGram(Spans(family), delta.values, gram);
  auto terms = awd_internal::ComputePairTerms(k, gram);
  if (terms.degenerate >= 0) ThrowDegenerate(family, terms.degenerate);
  return terms;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

namespace awd_internal {

PairTerms ComputePairTerms(size_t k, std::span<const double> gram) {
  PairTerms t;
  t.weights.assign(k, 0.0);
  std::vector<double> norms(k);
  for (size_t i = 0; i < k; ++i) {
    const double g = gram[i * k + i];
    if (!(g > 0.0) || !std::isfinite(g)) {
      t.degenerate = static_cast<int>(i);
      return t;
    }
    norms[i] = std::sqrt(g);
  }
  // d|cos(a_i, a_j)|/d delta = -s * [(G_ii - G_ij) a_i / (G_ii n_i n_j) + (G_jj - G_ij) a_j / (G_jj n_i n_j)]
  // which vanishes exactly for identical vectors and, through s = sign(G_ij),
  // for exactly orthogonal ones.
  double abs_sum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      const double gij = gram[i * k + j];
      const double nn = norms[i] * norms[j];
      abs_sum += std::abs(std::clamp(gij / nn, -1.0, 1.0));
      const double s = Sign(gij);
      if (s == 0.0) continue;
      t.weights[i] += s * (gram[i * k + i] - gij) / (gram[i * k + i] * nn);
      t.weights[j] += s * (gram[j * k + j] - gij) / (gram[j * k + j] * nn);
    }
  }
  // Each unordered pair appears twice in the ordered double sum.
  const double pairs = static_cast<double>(k * (k - 1));
  t.orthogonality_loss = 2.0 * abs_sum / pairs;
  for (double& w : t.weights) w *= -2.0 / pairs;
  return t;
}

}  // namespace awd_internal

uint64_t FamilyFingerprint(std::span<const TaskVector> family) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& tv : family) {
    mix(tv.task_label.data(), tv.task_label.size());
    mix("\0", 1);
    mix(&tv.base_fingerprint, sizeof(tv.base_fingerprint));
  }
  return h;
}

RedundantVector RedundantVector::Zeros(std::span<const TaskVector> family) {
  ValidateFamily(family);
  RedundantVector rv;
  rv.layout = family[0].delta.layout_ptr();
  rv.values.assign(rv.layout->numel(), 0.0);
  rv.family_fingerprint = FamilyFingerprint(family);
  return rv;
}

ParameterSet RedundantVector::ToParameterSet() const {
  std::vector<float> data(values.size());
  for (size_t x = 0; x < values.size(); ++x) data[x] = static_cast<float>(values[x]);
  ParameterSet ps(layout, std::move(data));
  ps.metadata()["taskforge.family_fingerprint"] = FingerprintHex(family_fingerprint);
  return ps;
}

void SolverConfig::Validate() const {
  if (steps < 1) throw Error(ErrorCode::kInvalidConfig, "steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning rate must be positive");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must be non-negative");
  }
  if (log_every < 1) throw Error(ErrorCode::kInvalidConfig, "log_every must be >= 1");
}

nlohmann::json SolverConfig::ToJson() const {
  return {{"steps", steps},
          {"learning_rate", learning_rate},
          {"alpha", alpha},
          {"log_every", log_every},
          {"seed", seed}};
}

std::string SolverTrace::ToCsv() const {
  std::ostringstream os;
  os << "step,L_O,L_R,L,grad_norm,mean_abs_cos\n";
  for (const auto& r : records) {
    os << r.step << ',' << FormatDouble(r.orthogonality_loss) << ',' << FormatDouble(r.invariance_loss)
       << ',' << FormatDouble(r.total_loss) << ',' << FormatDouble(r.grad_norm) << ','
       << FormatDouble(r.mean_abs_cos) << '\n';
  }
  return os.str();
}

nlohmann::json SolveResult::Sidecar(std::span<const TaskVector> family,
                                    const SolverConfig& config) const {
  nlohmann::json j;
  j["family_labels"] = nlohmann::json::array();
  for (const auto& tv : family) j["family_labels"].push_back(tv.task_label);
  j["family_fingerprint"] = FingerprintHex(delta.family_fingerprint);
  j["config"] = config.ToJson();
  j["final_losses"] = {{"L", final_loss.total},
                       {"L_O", final_loss.orthogonality},
                       {"L_R", final_loss.invariance}};
  j["steps_completed"] = steps_completed;
  j["diverged"] = diverged;
  if (!message.empty()) j["message"] = message;
  return j;
}

double OrthogonalityLoss(std::span<const TaskVector> family, const RedundantVector& delta) {
  return DirectTerms(family, delta).orthogonality_loss;
}

double InvarianceLoss(const RedundantVector& delta) {
  return std::sqrt(kernels::SumSquares(std::span<const double>(delta.values)));
}

LossBreakdown TotalLoss(std::span<const TaskVector> family, const RedundantVector& delta,
                        double alpha) {
  const double lo = OrthogonalityLoss(family, delta);
  const double lr = InvarianceLoss(delta);
  return {lo + alpha * lr, lo, lr};
}

RedundantVector LossGradient(std::span<const TaskVector> family, const RedundantVector& delta,
                             double alpha) {
  const auto terms = DirectTerms(family, delta);
  const double norm = InvarianceLoss(delta);
  const double self = norm > 0.0 ? alpha / norm : 0.0;
  RedundantVector grad;
  grad.layout = delta.layout;
  grad.family_fingerprint = delta.family_fingerprint;
  grad.values.resize(delta.values.size());
  kernels::GradientCombine(Spans(family), terms.weights, self, delta.values, grad.values);
  return grad;
}

SolveResult Solve(std::span<const TaskVector> family, const SolverConfig& config) {
  RequirePairs(family);
  config.Validate();
  const size_t k = family.size();
  const auto spans = Spans(family);

  // Everything per step follows from the fixed Gram matrix of the task
  // vectors, <tau_i, delta> and <delta, delta>:
  //   <tau_i - delta, tau_j - delta> = T_ij - p_i - p_j + q.
  std::vector<double> tau_gram(k * k);
  kernels::ShiftedGram(spans, {}, tau_gram);

  SolveResult result;
  result.delta = RedundantVector::Zeros(family);
  std::vector<double> next(result.delta.values.size());
  std::vector<double> p(k, 0.0), p_next(k);
  double q = 0.0;

  std::vector<double> gram(k * k);
  struct StepTerms {
    awd_internal::PairTerms pair;
    LossBreakdown loss;
    double self_coeff;
    double grad_norm;
  };
  auto evaluate = [&]() {
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = 0; j < k; ++j) gram[i * k + j] = tau_gram[i * k + j] - p[i] - p[j] + q;
    }
    StepTerms st;
    st.pair = awd_internal::ComputePairTerms(k, gram);
    const double norm = std::sqrt(q);
    st.loss = {st.pair.orthogonality_loss + config.alpha * norm, st.pair.orthogonality_loss, norm};
    double wsum = 0.0, wp = 0.0, wtw = 0.0;
    for (size_t i = 0; i < k; ++i) {
      wsum += st.pair.weights[i];
      wp += st.pair.weights[i] * p[i];
      for (size_t j = 0; j < k; ++j) wtw += st.pair.weights[i] * st.pair.weights[j] * tau_gram[i * k + j];
    }
    // grad = sum_i w_i tau_i + self * delta
    st.self_coeff = -wsum + (q > 0.0 ? config.alpha / norm : 0.0);
    st.grad_norm = std::sqrt(std::max(0.0, wtw + 2.0 * st.self_coeff * wp + st.self_coeff * st.self_coeff * q));
    return st;
  };
  auto record = [&](int64_t step, const StepTerms& st) {
    result.trace.records.push_back({step, st.loss.orthogonality, st.loss.invariance, st.loss.total,
                                    st.grad_norm, st.pair.orthogonality_loss});
  };
  auto finite = [](const StepTerms& st) {
    return st.pair.degenerate < 0 && std::isfinite(st.loss.total) && std::isfinite(st.grad_norm) &&
           std::isfinite(st.self_coeff) && AllFinite(st.pair.weights);
  };

  StepTerms current = evaluate();
  if (current.pair.degenerate >= 0) ThrowDegenerate(family, current.pair.degenerate);
  LossBreakdown last_finite = current.loss;

  for (int64_t n = 0; n < config.steps; ++n) {
    if (!finite(current)) {
      result.diverged = true;
      result.message = "non-finite loss or gradient at step " + std::to_string(n);
      break;
    }
    if (n % config.log_every == 0) record(n, current);
    const double q_next = kernels::AwdStep(spans, current.pair.weights, current.self_coeff,
                                           config.learning_rate, result.delta.values, next, p_next);
    if (!std::isfinite(q_next) || !AllFinite(p_next)) {
      result.diverged = true;
      result.message = "non-finite iterate at step " + std::to_string(n + 1);
      break;
    }
    std::swap(result.delta.values, next);
    std::swap(p, p_next);
    q = q_next;
    result.steps_completed = n + 1;
    current = evaluate();
    if (finite(current)) last_finite = current.loss;
  }
  if (finite(current)) {
    if (result.trace.records.empty() || result.trace.records.back().step != result.steps_completed) {
      record(result.steps_completed, current);
    }
  }
  result.final_loss = last_finite;
  return result;
}

std::vector<TaskVector> Disentangle(std::span<const TaskVector> family, const RedundantVector& delta) {
  ValidateFamily(family);
  RequireMatchingDelta(family, delta);
  std::vector<TaskVector> out;
  out.reserve(family.size());
  for (const auto& tv : family) {
    TaskVector d{ParameterSet::Zeros(tv.delta.layout_ptr()), tv.task_label, tv.base_fingerprint, true};
    kernels::SubtractShift(tv.delta.flat(), delta.values, d.delta.flat());
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace taskforge
