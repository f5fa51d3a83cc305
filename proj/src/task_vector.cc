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

#include "taskforge/task_vector.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
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

ParameterSet SameLayoutAs(const ParameterSet& like) { return ParameterSet::Zeros(like.layout_ptr()); }

}  // namespace

ParameterSet ToCheckpoint(const TaskVector& tv) {
  ParameterSet ps = tv.delta;
  ps.metadata()[kLabelKey] = tv.task_label;
  ps.metadata()[kBaseFingerprintKey] = FingerprintHex(tv.base_fingerprint);
  if (tv.disentangled) ps.metadata()[kDisentangledKey] = "true";
  return ps;
}

TaskVector FromCheckpoint(ParameterSet ps, const std::string& fallback_label) {
  TaskVector tv;
  const auto& md = ps.metadata();
  auto it = md.find(kLabelKey);
  tv.task_label = it != md.end() ? it->second : fallback_label;
  it = md.find(kBaseFingerprintKey);
  tv.base_fingerprint = it != md.end() ? std::stoull(it->second, nullptr, 16) : ps.fingerprint();
  it = md.find(kDisentangledKey);
  tv.disentangled = it != md.end() && it->second == "true";
  tv.delta = std::move(ps);
  return tv;
}

TaskVector Extract(const ParameterSet& finetuned, const ParameterSet& base, std::string label) {
  ValidateAligned(finetuned, base);
  ParameterSet delta = SameLayoutAs(base);
  kernels::Subtract(finetuned.flat(), base.flat(), delta.flat());
  return TaskVector{std::move(delta), std::move(label), base.fingerprint(), false};
}

void ValidateFamily(std::span<const TaskVector> family) {
  if (family.empty()) throw Error(ErrorCode::kEmptyFamily, "task-vector family is empty");
  for (size_t i = 1; i < family.size(); ++i) {
    ValidateAligned(family[0].delta, family[i].delta);
  }
}

ParameterSet Apply(const ParameterSet& base, std::span<const TaskVector> family,
                   const CoefficientSchedule& schedule) {
  ValidateFamily(family);
  ValidateAligned(base, family[0].delta);
  const size_t k = family.size();
  const auto spans = Spans(family);
  ParameterSet out = SameLayoutAs(base);

  if (const auto* g = std::get_if<GlobalCoefficient>(&schedule)) {
    const std::vector<double> ones(k, 1.0);
    kernels::Combine(base.flat(), spans, ones, g->lambda, out.flat());
  } else if (const auto* pt = std::get_if<PerTaskCoefficients>(&schedule)) {
    if (pt->lambdas.size() != k) {
      throw Error(ErrorCode::kScheduleDimensionMismatch,
                  "per-task schedule has " + std::to_string(pt->lambdas.size()) +
                      " coefficients for " + std::to_string(k) + " tasks");
    }
    kernels::Combine(base.flat(), spans, pt->lambdas, 1.0, out.flat());
  } else {
    const auto& pl = std::get<PerTaskPerLayerCoefficients>(schedule);
    const auto& tensors = base.layout().tensors();
    if (pl.matrix.size() != k) {
      throw Error(ErrorCode::kScheduleDimensionMismatch,
                  "layer-wise schedule has " + std::to_string(pl.matrix.size()) + " rows for " +
                      std::to_string(k) + " tasks");
    }
    if (pl.layer_names.size() != tensors.size()) {
      throw Error(ErrorCode::kScheduleDimensionMismatch,
                  "layer-wise schedule names " + std::to_string(pl.layer_names.size()) +
                      " layers, model has " + std::to_string(tensors.size()));
    }
    for (const auto& row : pl.matrix) {
      if (row.size() != pl.layer_names.size()) {
        throw Error(ErrorCode::kScheduleDimensionMismatch, "ragged layer-wise schedule");
      }
    }
    // Column index for every tensor in layout order; each tensor exactly once.
    std::vector<size_t> column(tensors.size(), SIZE_MAX);
    for (size_t p = 0; p < pl.layer_names.size(); ++p) {
      const TensorInfo* info = base.layout().Find(pl.layer_names[p]);
      if (info == nullptr) {
        throw Error(ErrorCode::kScheduleDimensionMismatch,
                    "schedule names unknown tensor '" + pl.layer_names[p] + "'", pl.layer_names[p]);
      }
      const auto t = static_cast<size_t>(info - tensors.data());
      if (column[t] != SIZE_MAX) {
        throw Error(ErrorCode::kScheduleDimensionMismatch,
                    "schedule names tensor '" + pl.layer_names[p] + "' twice", pl.layer_names[p]);
      }
      column[t] = p;
    }
    std::vector<double> coeffs(k);
    std::vector<std::span<const float>> slices(k);
    for (size_t t = 0; t < tensors.size(); ++t) {
      const TensorInfo& info = tensors[t];
      for (size_t i = 0; i < k; ++i) {
        coeffs[i] = pl.matrix[i][column[t]];
        slices[i] = spans[i].subspan(info.offset, info.numel);
      }
      kernels::Combine(base.flat().subspan(info.offset, info.numel), slices, coeffs, 1.0,
                       out.flat().subspan(info.offset, info.numel));
    }
  }
  return out;
}

double FlatDot(const TaskVector& a, const TaskVector& b) {
  ValidateAligned(a.delta, b.delta);
  return kernels::Dot(a.delta.flat(), b.delta.flat());
}

double FlatNorm(const TaskVector& a) { return std::sqrt(kernels::SumSquares(a.delta.flat())); }

double Cosine(const TaskVector& a, const TaskVector& b) {
  ValidateAligned(a.delta, b.delta);
  const double na = FlatNorm(a);
  const double nb = FlatNorm(b);
  if (na == 0.0) throw Error(ErrorCode::kZeroVector, "task vector '" + a.task_label + "' is zero", a.task_label);
  if (nb == 0.0) throw Error(ErrorCode::kZeroVector, "task vector '" + b.task_label + "' is zero", b.task_label);
  return std::clamp(kernels::Dot(a.delta.flat(), b.delta.flat()) / (na * nb), -1.0, 1.0);
}

TaskVector Scale(const TaskVector& v, double s) {
  TaskVector out{SameLayoutAs(v.delta), v.task_label, v.base_fingerprint, v.disentangled};
  kernels::Scale(v.delta.flat(), s, out.delta.flat());
  return out;
}

TaskVector Add(const TaskVector& a, const TaskVector& b) {
  ValidateAligned(a.delta, b.delta);
  TaskVector out{SameLayoutAs(a.delta), a.task_label + "+" + b.task_label, a.base_fingerprint,
                 a.disentangled && b.disentangled};
  kernels::Add(a.delta.flat(), b.delta.flat(), out.delta.flat());
  return out;
}

TaskVector Negate(const TaskVector& v) {
  TaskVector out{SameLayoutAs(v.delta), v.task_label, v.base_fingerprint, v.disentangled};
  auto src = v.delta.flat();
  auto dst = out.delta.flat();
  for (size_t x = 0; x < src.size(); ++x) dst[x] = -src[x];
  return out;
}

SimilarityMatrix ComputeSimilarityMatrix(std::span<const TaskVector> family) {
  ValidateFamily(family);
  const size_t k = family.size();
  const auto spans = Spans(family);
  std::vector<double> gram(k * k);
  kernels::ShiftedGram(spans, {}, gram);

  SimilarityMatrix m;
  for (const auto& tv : family) m.labels.push_back(tv.task_label);
  for (size_t i = 0; i < k; ++i) {
    if (gram[i * k + i] == 0.0) {
      throw Error(ErrorCode::kZeroVector, "task vector '" + family[i].task_label + "' is zero",
                  family[i].task_label);
    }
  }
  m.values.assign(k, std::vector<double>(k, 0.0));
  for (size_t i = 0; i < k; ++i) {
    m.values[i][i] = 1.0;
    for (size_t j = i + 1; j < k; ++j) {
      const double c = std::clamp(
          gram[i * k + j] / (std::sqrt(gram[i * k + i]) * std::sqrt(gram[j * k + j])), -1.0, 1.0);
      m.values[i][j] = c;
      m.values[j][i] = c;
    }
  }
  return m;
}

double SimilarityMatrix::MeanAbsOffDiagonal() const {
  const size_t k = values.size();
  if (k < 2) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      if (i != j) acc += std::abs(values[i][j]);
    }
  }
  return acc / static_cast<double>(k * (k - 1));
}

std::string SimilarityMatrix::ToJson() const {
  nlohmann::json j;
  j["labels"] = labels;
  j["values"] = values;
  return j.dump(2) + "\n";
}

std::string SimilarityMatrix::ToCsv() const {
  std::ostringstream os;
  for (size_t i = 0; i < labels.size(); ++i) os << (i ? "," : "") << CsvField(labels[i]);
  os << "\n";
  for (const auto& row : values) {
    for (size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << FormatDouble(row[j]);
    os << "\n";
  }
  return os.str();
}

std::vector<TensorCosine> PerTensorCosines(std::span<const TaskVector> family) {
  ValidateFamily(family);
  std::vector<TensorCosine> out;
  const auto& tensors = family[0].delta.layout().tensors();
  for (const auto& info : tensors) {
    for (size_t i = 0; i < family.size(); ++i) {
      auto a = family[i].delta.flat().subspan(info.offset, info.numel);
      for (size_t j = i + 1; j < family.size(); ++j) {
        auto b = family[j].delta.flat().subspan(info.offset, info.numel);
        const double na = std::sqrt(kernels::SumSquares(a));
        const double nb = std::sqrt(kernels::SumSquares(b));
        const double c = (na == 0.0 || nb == 0.0)
                             ? std::nan("")
                             : std::clamp(kernels::Dot(a, b) / (na * nb), -1.0, 1.0);
        out.push_back({info.name, i, j, c});
      }
    }
  }
  return out;
}

}  // namespace taskforge
