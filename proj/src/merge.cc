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

#include "taskforge/merge.h"

#include <algorithm>
#include <cmath>

#include "taskforge/error.h"
#include "taskforge/kernels.h"

namespace taskforge {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

size_t KeepCount(double trim_fraction, size_t d) {
  if (d == 0) return 0;
  const double exact = trim_fraction * static_cast<double>(d);
  // Absorb representation error so that e.g. 0.2 * 10 keeps 2, not 3.
  const auto m = static_cast<size_t>(std::ceil(exact - exact * 1e-12));
  return std::clamp<size_t>(m, 1, d);
}

void MaskRange(std::span<const float> v, double trim_fraction, std::span<uint8_t> mask) {
  const size_t d = v.size();
  std::fill(mask.begin(), mask.end(), 0);
  const size_t m = KeepCount(trim_fraction, d);
  if (m == 0) return;
  std::vector<float> mags(d);
  for (size_t x = 0; x < d; ++x) mags[x] = std::abs(v[x]);
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(m - 1), mags.end(),
                   std::greater<float>());
  const float threshold = mags[m - 1];
  size_t kept = 0;
  for (size_t x = 0; x < d; ++x) {
    if (std::abs(v[x]) > threshold) {
      mask[x] = 1;
      ++kept;
    }
  }
  for (size_t x = 0; x < d && kept < m; ++x) {
    if (std::abs(v[x]) == threshold) {
      mask[x] = 1;
      ++kept;
    }
  }
}

}  // namespace

std::string MethodName(MergeMethod m) {
  switch (m) {
    case MergeMethod::kAverage: return "average";
    case MergeMethod::kTaskArithmetic: return "task-arithmetic";
    case MergeMethod::kTies: return "ties";
    case MergeMethod::kDareTaskArithmetic: return "dare-ta";
    case MergeMethod::kAwdTaskArithmetic: return "awd-ta";
  }
  return "unknown";
}

MergeMethod ParseMethod(const std::string& name) {
  for (auto m : {MergeMethod::kAverage, MergeMethod::kTaskArithmetic, MergeMethod::kTies,
                 MergeMethod::kDareTaskArithmetic, MergeMethod::kAwdTaskArithmetic}) {
    if (MethodName(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown merge method '" + name + "'", name);
}

void MergeConfig::Validate() const {
  if (method == MergeMethod::kTies && !(ties_trim_fraction > 0.0 && ties_trim_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidTrimFraction, "trim fraction must lie in (0, 1]");
  }
  if (method == MergeMethod::kDareTaskArithmetic && !(dare_drop_rate >= 0.0 && dare_drop_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidDropRate, "drop rate must lie in [0, 1)");
  }
  if (method == MergeMethod::kAwdTaskArithmetic) {
    if (!awd) throw Error(ErrorCode::kInvalidConfig, "awd-ta needs solver settings");
    awd->Validate();
  }
}

nlohmann::json MergeConfig::ToJson() const {
  nlohmann::json j;
  j["method"] = MethodName(method);
  if (const auto* g = std::get_if<GlobalCoefficient>(&schedule)) {
    j["schedule"] = {{"kind", "global"}, {"lambda", g->lambda}};
  } else if (const auto* pt = std::get_if<PerTaskCoefficients>(&schedule)) {
    j["schedule"] = {{"kind", "per-task"}, {"lambdas", pt->lambdas}};
  } else {
    const auto& pl = std::get<PerTaskPerLayerCoefficients>(schedule);
    j["schedule"] = {{"kind", "per-task-per-layer"}, {"matrix", pl.matrix}, {"layer_names", pl.layer_names}};
  }
  if (method == MergeMethod::kTies) {
    j["ties_trim_fraction"] = ties_trim_fraction;
    j["ties_per_tensor"] = ties_per_tensor;
  }
  if (method == MergeMethod::kDareTaskArithmetic) j["dare_drop_rate"] = dare_drop_rate;
  j["rng_seed"] = rng_seed;
  if (awd) j["awd"] = awd->ToJson();
  return j;
}

ParameterSet WeightAverage(std::span<const ParameterSet> models) {
  if (models.empty()) throw Error(ErrorCode::kEmptyFamily, "nothing to average");
  std::vector<std::span<const float>> spans;
  for (const auto& m : models) {
    ValidateAligned(models[0], m);
    spans.push_back(m.flat());
  }
  ParameterSet out = ParameterSet::Zeros(models[0].layout_ptr());
  kernels::Mean(spans, out.flat());
  return out;
}

ParameterSet TaskArithmetic(const ParameterSet& base, std::span<const TaskVector> family,
                            double lambda) {
  return Apply(base, family, GlobalCoefficient{lambda});
}

std::vector<uint8_t> TopMagnitudeMask(std::span<const float> v, double trim_fraction) {
  std::vector<uint8_t> mask(v.size());
  MaskRange(v, trim_fraction, mask);
  return mask;
}

ParameterSet TiesMerge(const ParameterSet& base, std::span<const TaskVector> family,
                       double trim_fraction, double lambda, bool per_tensor) {
  if (!(trim_fraction > 0.0 && trim_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidTrimFraction, "trim fraction must lie in (0, 1]");
  }
  ValidateFamily(family);
  ValidateAligned(base, family[0].delta);
  const size_t k = family.size();
  const size_t d = base.numel();

  std::vector<std::vector<uint8_t>> masks(k, std::vector<uint8_t>(d));
  for (size_t t = 0; t < k; ++t) {
    auto v = family[t].delta.flat();
    if (per_tensor) {
      for (const auto& info : base.layout().tensors()) {
        MaskRange(v.subspan(info.offset, info.numel), trim_fraction,
                  std::span<uint8_t>(masks[t]).subspan(info.offset, info.numel));
      }
    } else {
      MaskRange(v, trim_fraction, masks[t]);
    }
  }

  ParameterSet out = ParameterSet::Zeros(base.layout_ptr());
  auto dst = out.flat();
  auto src = base.flat();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sx = 0; sx < static_cast<std::ptrdiff_t>(d); ++sx) {
    const auto x = static_cast<size_t>(sx);
    double sum = 0.0;
    for (size_t t = 0; t < k; ++t) {
      if (masks[t][x]) sum += static_cast<double>(family[t].delta.flat()[x]);
    }
    double merged = 0.0;
    if (sum != 0.0) {
      const bool positive = sum > 0.0;
      double agree = 0.0;
      size_t count = 0;
      for (size_t t = 0; t < k; ++t) {
        const float v = family[t].delta.flat()[x];
        if (masks[t][x] && (positive ? v > 0.0f : v < 0.0f)) {
          agree += static_cast<double>(v);
          ++count;
        }
      }
      merged = agree / static_cast<double>(count);
    }
    dst[x] = static_cast<float>(static_cast<double>(src[x]) + lambda * merged);
  }
  return out;
}

double KeyedUniform(uint64_t seed, uint64_t stream, uint64_t counter) {
  const uint64_t h = SplitMix64(SplitMix64(SplitMix64(seed) ^ stream) ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<TaskVector> DarePreprocess(std::span<const TaskVector> family, double drop_rate,
                                       uint64_t seed) {
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidDropRate, "drop rate must lie in [0, 1)");
  }
  const double rescale = 1.0 / (1.0 - drop_rate);
  std::vector<TaskVector> out;
  out.reserve(family.size());
  for (size_t t = 0; t < family.size(); ++t) {
    const auto& tv = family[t];
    TaskVector d{ParameterSet::Zeros(tv.delta.layout_ptr()), tv.task_label, tv.base_fingerprint,
                 tv.disentangled};
    auto src = tv.delta.flat();
    auto dst = d.delta.flat();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sx = 0; sx < static_cast<std::ptrdiff_t>(src.size()); ++sx) {
      const auto x = static_cast<size_t>(sx);
      const bool drop = KeyedUniform(seed, t, x) < drop_rate;
      dst[x] = drop ? 0.0f : static_cast<float>(static_cast<double>(src[x]) * rescale);
    }
    out.push_back(std::move(d));
  }
  return out;
}

AwdMergeResult AwdTaskArithmetic(const ParameterSet& base, std::span<const TaskVector> family,
                                 double lambda, const SolverConfig& solver) {
  ValidateFamily(family);
  ValidateAligned(base, family[0].delta);
  SolveResult solved = Solve(family, solver);
  if (solved.diverged) {
    throw Error(ErrorCode::kNumericalDivergence, solved.message);
  }
  const auto disentangled = Disentangle(family, solved.delta);
  return {TaskArithmetic(base, disentangled, lambda), std::move(solved)};
}

ParameterSet LayerwiseApply(const ParameterSet& base, std::span<const TaskVector> family,
                            const PerTaskPerLayerCoefficients& schedule) {
  return Apply(base, family, schedule);
}

MergeOutcome RunMerge(const MergeConfig& config, const ParameterSet* base,
                      std::span<const TaskVector> family, std::span<const ParameterSet> models) {
  config.Validate();
  if (config.method == MergeMethod::kAverage) return {WeightAverage(models), std::nullopt};
  if (base == nullptr) throw Error(ErrorCode::kInvalidConfig, MethodName(config.method) + " needs a base model");

  auto global_lambda = [&]() {
    if (const auto* g = std::get_if<GlobalCoefficient>(&config.schedule)) return g->lambda;
    throw Error(ErrorCode::kInvalidConfig, MethodName(config.method) + " takes a single global lambda");
  };

  switch (config.method) {
    case MergeMethod::kTaskArithmetic:
      return {Apply(*base, family, config.schedule), std::nullopt};
    case MergeMethod::kTies:
      return {TiesMerge(*base, family, config.ties_trim_fraction, global_lambda(), config.ties_per_tensor),
              std::nullopt};
    case MergeMethod::kDareTaskArithmetic: {
      const auto dropped = DarePreprocess(family, config.dare_drop_rate, config.rng_seed);
      return {Apply(*base, dropped, config.schedule), std::nullopt};
    }
    case MergeMethod::kAwdTaskArithmetic: {
      ValidateFamily(family);
      SolveResult solved = Solve(family, *config.awd);
      if (solved.diverged) throw Error(ErrorCode::kNumericalDivergence, solved.message);
      const auto disentangled = Disentangle(family, solved.delta);
      return {Apply(*base, disentangled, config.schedule), std::move(solved)};
    }
    case MergeMethod::kAverage:
      break;
  }
  return {WeightAverage(models), std::nullopt};
}

}  // namespace taskforge
