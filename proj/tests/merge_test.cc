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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "taskforge/error.h"
#include "taskforge/kernels.h"
#include "test_util.h"

namespace taskforge {
namespace {

using testing::FamilyFromRows;

ParameterSet Row(const std::vector<float>& v) {
  return ParameterSet::FromTensors({{"w", {{static_cast<int64_t>(v.size())}, v}}});
}

std::vector<float> Flat(const ParameterSet& ps) { return {ps.flat().begin(), ps.flat().end()}; }

TEST(WeightAverageTest, SingleModelIsItself) {
  std::mt19937_64 rng(1);
  const std::vector<ParameterSet> models{testing::RandomParameterSet(testing::RandomLayout(rng), rng)};
  EXPECT_TRUE(BitwiseEqual(WeightAverage(models), models[0]));
}

TEST(WeightAverageTest, Midpoint) {
  const std::vector<ParameterSet> models{Row({0, 2}), Row({2, 0})};
  EXPECT_EQ(Flat(WeightAverage(models)), (std::vector<float>{1, 1}));
}

TEST(WeightAverageTest, MatchesElementwiseMean) {
  std::mt19937_64 rng(2);
  auto layout = Layout::Make({{"a", Shape{37}}, {"b", Shape{5, 5}}});
  std::vector<ParameterSet> models;
  for (int i = 0; i < 5; ++i) models.push_back(testing::RandomParameterSet(layout, rng));
  const auto avg = WeightAverage(models);
  for (size_t x = 0; x < avg.numel(); ++x) {
    double s = 0;
    for (const auto& m : models) s += m.flat()[x];
    EXPECT_NEAR(avg.flat()[x], s / 5, 1e-6);
  }
  EXPECT_THROW(WeightAverage({}), Error);
}

TEST(TaskArithmeticTest, FacadeMatchesApply) {
  const auto base = Row({1, 1});
  const auto fam = FamilyFromRows({{2, 4}, {8, -4}});
  EXPECT_TRUE(BitwiseEqual(TaskArithmetic(base, fam, 0.5), Apply(base, fam, GlobalCoefficient{0.5})));
  EXPECT_EQ(Flat(TaskArithmetic(base, fam, 0.5)), (std::vector<float>{6, 1}));
  EXPECT_TRUE(BitwiseEqual(TaskArithmetic(base, fam, 0.0), base));
}

TEST(TopMagnitudeMaskTest, KeepsLargestWithIndexTieBreak) {
  const std::vector<float> v{0.1f, -3.0f, 2.0f, -2.0f, 0.0f};
  EXPECT_EQ(TopMagnitudeMask(v, 0.4), (std::vector<uint8_t>{0, 1, 1, 0, 0}));
  EXPECT_EQ(TopMagnitudeMask(v, 0.6), (std::vector<uint8_t>{0, 1, 1, 1, 0}));
  EXPECT_EQ(TopMagnitudeMask(v, 1.0), (std::vector<uint8_t>{1, 1, 1, 1, 1}));
  // ceil(0.01 * 5) = 1
  EXPECT_EQ(TopMagnitudeMask(v, 0.01), (std::vector<uint8_t>{0, 1, 0, 0, 0}));
  // 0.2 * 10 is exactly 2 despite binary rounding.
  std::vector<float> ten(10);
  for (int i = 0; i < 10; ++i) ten[i] = static_cast<float>(i);
  const auto m = TopMagnitudeMask(ten, 0.2);
  EXPECT_EQ(std::count(m.begin(), m.end(), 1), 2);
}

TEST(TiesMergeTest, SingleTaskFullKeepEqualsTaskArithmetic) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto layout = testing::RandomLayout(rng, 5, 30);
    const auto base = testing::RandomParameterSet(layout, rng);
    const std::vector<TaskVector> fam{{testing::RandomParameterSet(layout, rng), "t", 0, false}};
    ASSERT_TRUE(BitwiseEqual(TiesMerge(base, fam, 1.0, 0.7), TaskArithmetic(base, fam, 0.7)));
  }
}

TEST(TiesMergeTest, HandTraces) {
  const auto base = Row({0, 0, 0});
  // Coordinate 0: (+2, -1) -> elect +, mean of {+2} = 2.
  // Coordinate 1: (+1, -1) -> zero sum, output 0.
  // Coordinate 2: (+1, +3) -> mean 2.
  const auto fam = FamilyFromRows({{2, 1, 1}, {-1, -1, 3}});
  EXPECT_EQ(Flat(TiesMerge(base, fam, 1.0, 1.0)), (std::vector<float>{2, 0, 2}));
  EXPECT_EQ(Flat(TiesMerge(base, fam, 1.0, 0.5)), (std::vector<float>{1, 0, 1}));
}

TEST(TiesMergeTest, TrimStage) {
  const auto base = Row({0, 0, 0, 0});
  // k = 0.5 keeps two entries per task: task0 keeps {4, -3}, task1 keeps {-5, 1}
  const auto fam = FamilyFromRows({{4, -3, 1, 0}, {-5, 0.5, 0.25, 1}});
  // coord0: 4 + -5 = -1 -> elect -, mean -5; coord1: -3; coord2: nothing kept;
  // coord3: 1
  EXPECT_EQ(Flat(TiesMerge(base, fam, 0.5, 1.0)), (std::vector<float>{-5, -3, 0, 1}));
}

TEST(TiesMergeTest, PerTensorTrim) {
  auto layout = Layout::Make({{"a", Shape{2}}, {"b", Shape{2}}});
  const auto base = ParameterSet::Zeros(layout);
  std::vector<TaskVector> fam{{ParameterSet(layout, {10, 9, 1, 2}), "t", 0, false}};
  EXPECT_EQ(Flat(TiesMerge(base, fam, 0.5, 1.0, false)), (std::vector<float>{10, 9, 0, 0}));
  EXPECT_EQ(Flat(TiesMerge(base, fam, 0.5, 1.0, true)), (std::vector<float>{10, 0, 0, 2}));
}

TEST(TiesMergeTest, InvalidTrimFraction) {
  const auto fam = FamilyFromRows({{1}});
  for (double k : {0.0, -0.1, 1.5}) {
    try {
      TiesMerge(Row({0}), fam, k, 1.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidTrimFraction);
    }
  }
}

TEST(DareTest, ZeroRateIsIdentity) {
  const auto fam = testing::CorrelatedFamily(2, 100, 0.5, 4);
  const auto out = DarePreprocess(fam, 0.0, 42);
  for (size_t i = 0; i < fam.size(); ++i) EXPECT_TRUE(BitwiseEqual(out[i].delta, fam[i].delta));
}

TEST(DareTest, SameSeedSameOutput) {
  const auto fam = testing::CorrelatedFamily(2, 5000, 0.5, 5);
  const auto a = DarePreprocess(fam, 0.7, 9);
  kernels::SetMaxThreads(4);
  const auto b = DarePreprocess(fam, 0.7, 9);
  kernels::SetMaxThreads(0);
  for (size_t i = 0; i < fam.size(); ++i) EXPECT_TRUE(BitwiseEqual(a[i].delta, b[i].delta));
  const auto c = DarePreprocess(fam, 0.7, 10);
  EXPECT_FALSE(BitwiseEqual(a[0].delta, c[0].delta));
}

TEST(DareTest, SurvivorsRescaled) {
  const auto fam = FamilyFromRows({std::vector<double>(1000, 1.5)});
  const auto out = DarePreprocess(fam, 0.5, 1);
  size_t kept = 0;
  for (float v : out[0].delta.flat()) {
    EXPECT_TRUE(v == 0.0f || v == 3.0f);
    kept += v != 0.0f;
  }
  EXPECT_GT(kept, 400u);
  EXPECT_LT(kept, 600u);
}

TEST(DareTest, MonteCarloUnbiased) {
  const auto fam = FamilyFromRows({{0.7, -1.3, 2.1}});
  const int seeds = 10000;
  const double p = 0.5;
  for (size_t x = 0; x < 3; ++x) {
    double sum = 0.0;
    for (int s = 0; s < seeds; ++s) sum += DarePreprocess(fam, p, static_cast<uint64_t>(s))[0].delta.flat()[x];
    const double v = fam[0].delta.flat()[x];
    const double mean = sum / seeds;
    // Var of the rescaled Bernoulli: v^2 p / (1 - p)
    const double se = std::abs(v) * std::sqrt(p / (1 - p)) / std::sqrt(static_cast<double>(seeds));
    EXPECT_LT(std::abs(mean - v), 3 * se) << "coordinate " << x;
  }
}

TEST(DareTest, KeyedUniformRange) {
  double lo = 1, hi = 0, sum = 0;
  for (uint64_t c = 0; c < 100000; ++c) {
    const double u = KeyedUniform(7, 1, c);
    lo = std::min(lo, u), hi = std::max(hi, u), sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(DareTest, InvalidRate) {
  const auto fam = FamilyFromRows({{1}});
  for (double p : {1.0, -0.1}) {
    try {
      DarePreprocess(fam, p, 0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidDropRate);
    }
  }
}

TEST(AwdTaskArithmeticTest, OrthogonalFamilyEqualsTaskArithmetic) {
  std::mt19937_64 rng(6);
  const auto fam = testing::HadamardFamily(4, 256, 0.01);
  const auto base = testing::RandomParameterSet(fam[0].delta.layout_ptr(), rng);
  const auto r = AwdTaskArithmetic(base, fam, 0.3, SolverConfig{});
  EXPECT_TRUE(BitwiseEqual(r.merged, TaskArithmetic(base, fam, 0.3)));
}

TEST(AwdTaskArithmeticTest, HugeAlphaKeepsDeltaNearZero) {
  std::mt19937_64 rng(7);
  const auto fam = testing::CorrelatedFamily(3, 200, 1.0, 8);
  const auto base = testing::RandomParameterSet(fam[0].delta.layout_ptr(), rng);
  SolverConfig cfg;
  cfg.alpha = 1e9;
  cfg.learning_rate = 1e-16;
  cfg.steps = 100;
  const auto r = AwdTaskArithmetic(base, fam, 0.3, cfg);
  const auto ta = TaskArithmetic(base, fam, 0.3);
  for (size_t x = 0; x < ta.numel(); ++x) EXPECT_NEAR(r.merged.flat()[x], ta.flat()[x], 1e-6);
}

TEST(AwdTaskArithmeticTest, ComposesFromRecordedDelta) {
  auto fam = FamilyFromRows({{1, 0.5}, {0.5, 1}});
  const auto base = Row({0.25f, -0.5f});
  SolverConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.alpha = 0.0;
  cfg.steps = 200;
  const auto r = AwdTaskArithmetic(base, fam, 0.4, cfg);
  for (size_t x = 0; x < 2; ++x) {
    const double d = r.solve.delta.values[x];
    const double t1 = float(double(fam[0].delta.flat()[x]) - d);
    const double t2 = float(double(fam[1].delta.flat()[x]) - d);
    EXPECT_EQ(r.merged.flat()[x], float(double(base.flat()[x]) + 0.4 * (t1 + t2)));
  }
}

TEST(LayerwiseApplyTest, ConstantScheduleMatchesTaskArithmetic) {
  std::mt19937_64 rng(9);
  auto layout = Layout::Make({{"a", Shape{50}}, {"b", Shape{7, 3}}, {"c", Shape{}}});
  const auto base = testing::RandomParameterSet(layout, rng);
  std::vector<TaskVector> fam;
  for (int i = 0; i < 3; ++i) fam.push_back({testing::RandomParameterSet(layout, rng), "t", 0, false});
  PerTaskPerLayerCoefficients s{std::vector<std::vector<double>>(3, std::vector<double>(3, 0.3)), {"a", "b", "c"}};
  const auto lw = LayerwiseApply(base, fam, s);
  const auto ta = TaskArithmetic(base, fam, 0.3);
  for (size_t x = 0; x < ta.numel(); ++x) EXPECT_NEAR(lw.flat()[x], ta.flat()[x], 1e-6);
  PerTaskPerLayerCoefficients zero{std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0)), {"c", "a", "b"}};
  EXPECT_TRUE(BitwiseEqual(LayerwiseApply(base, fam, zero), base));
}

TEST(LayerwiseApplyTest, HandSchedule) {
  auto layout = Layout::Make({{"a", Shape{1}}, {"b", Shape{1}}});
  const auto base = ParameterSet(layout, {1, 1});
  std::vector<TaskVector> fam{{ParameterSet(layout, {2, 4}), "x", 0, false},
                              {ParameterSet(layout, {8, 16}), "y", 0, false}};
  // a: 1 + 0.5*2 + 0.25*8 = 4; b: 1 + 1*4 + 0*16 = 5
  PerTaskPerLayerCoefficients s{{{0.5, 1.0}, {0.25, 0.0}}, {"a", "b"}};
  EXPECT_EQ(Flat(LayerwiseApply(base, fam, s)), (std::vector<float>{4, 5}));
}

TEST(RunMergeTest, Dispatch) {
  const auto base = Row({1, 1});
  const auto fam = FamilyFromRows({{2, 4}, {8, -4}});
  MergeConfig cfg;
  cfg.schedule = GlobalCoefficient{0.5};
  EXPECT_TRUE(BitwiseEqual(RunMerge(cfg, &base, fam, {}).merged, TaskArithmetic(base, fam, 0.5)));
  cfg.method = MergeMethod::kTies;
  cfg.ties_trim_fraction = 1.0;
  EXPECT_TRUE(BitwiseEqual(RunMerge(cfg, &base, fam, {}).merged, TiesMerge(base, fam, 1.0, 0.5)));
  cfg.method = MergeMethod::kAverage;
  const std::vector<ParameterSet> models{Row({0, 2}), Row({2, 0})};
  EXPECT_EQ(Flat(RunMerge(cfg, nullptr, {}, models).merged), (std::vector<float>{1, 1}));
  cfg.method = MergeMethod::kAwdTaskArithmetic;
  EXPECT_THROW(RunMerge(cfg, &base, fam, {}), Error);  // missing solver settings
  cfg.awd = SolverConfig{};
  const auto out = RunMerge(cfg, &base, fam, {});
  ASSERT_TRUE(out.awd.has_value());
  cfg.method = MergeMethod::kTies;
  cfg.schedule = PerTaskCoefficients{{1, 1}};
  EXPECT_THROW(RunMerge(cfg, &base, fam, {}), Error);
}

TEST(MergeConfigTest, MethodNamesRoundTrip) {
  for (auto m : {MergeMethod::kAverage, MergeMethod::kTaskArithmetic, MergeMethod::kTies,
                 MergeMethod::kDareTaskArithmetic, MergeMethod::kAwdTaskArithmetic}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  EXPECT_THROW(ParseMethod("fisher"), Error);
  MergeConfig cfg;
  cfg.method = MergeMethod::kDareTaskArithmetic;
  EXPECT_EQ(cfg.ToJson()["dare_drop_rate"], 0.5);
  EXPECT_EQ(cfg.ToJson()["schedule"]["lambda"], 0.3);
}

}  // namespace
}  // namespace taskforge
