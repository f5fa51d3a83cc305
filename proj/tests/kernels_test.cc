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

#include "taskforge/kernels.h"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

namespace taskforge::kernels {
namespace {

std::vector<float> RandomFloats(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::vector<double> RandomDoubles(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

bool SameBits(double a, double b) { return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b); }

class ThreadCountTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { SetMaxThreads(GetParam()); }
  void TearDown() override { SetMaxThreads(0); }
};

// Sizes straddle the chunk boundary and include the empty vector.
const size_t kSizes[] = {0, 1, 7, kChunkSize - 1, kChunkSize, kChunkSize + 1, 3 * kChunkSize + 17, 100003};

TEST_P(ThreadCountTest, DotAndSumSquaresMatchSerialBitwise) {
  for (size_t n : kSizes) {
    const auto a = RandomFloats(n, n + 1);
    const auto b = RandomFloats(n, n + 2);
    const auto d = RandomDoubles(n, n + 3);
    EXPECT_TRUE(SameBits(Dot(a, b), serial::Dot(a, b))) << n;
    EXPECT_TRUE(SameBits(SumSquares(std::span<const float>(a)), serial::SumSquares(std::span<const float>(a)))) << n;
    EXPECT_TRUE(SameBits(SumSquares(std::span<const double>(d)), serial::SumSquares(std::span<const double>(d)))) << n;
  }
}

TEST_P(ThreadCountTest, ShiftedGramMatchesSerialBitwise) {
  for (size_t n : kSizes) {
    std::vector<std::vector<float>> storage;
    std::vector<std::span<const float>> spans;
    for (int i = 0; i < 4; ++i) storage.push_back(RandomFloats(n, 10 * n + i));
    for (auto& s : storage) spans.push_back(s);
    const auto shift = RandomDoubles(n, 7);
    std::vector<double> par(16), ser(16);
    ShiftedGram(spans, shift, par);
    serial::ShiftedGram(spans, shift, ser);
    for (int k = 0; k < 16; ++k) EXPECT_TRUE(SameBits(par[k], ser[k])) << n;
    ShiftedGram(spans, {}, par);
    serial::ShiftedGram(spans, {}, ser);
    for (int k = 0; k < 16; ++k) EXPECT_TRUE(SameBits(par[k], ser[k])) << n;
  }
}

TEST_P(ThreadCountTest, AwdStepMatchesSerialBitwise) {
  const size_t n = 3 * kChunkSize + 5;
  std::vector<std::vector<float>> storage;
  std::vector<std::span<const float>> spans;
  for (int i = 0; i < 3; ++i) storage.push_back(RandomFloats(n, 40 + i));
  for (auto& s : storage) spans.push_back(s);
  const auto delta = RandomDoubles(n, 9);
  const std::vector<double> w{0.3, -0.2, 0.05};
  std::vector<double> next_p(n), next_s(n), dots_p(3), dots_s(3);
  const double qp = AwdStep(spans, w, 0.7, 0.01, delta, next_p, dots_p);
  const double qs = serial::AwdStep(spans, w, 0.7, 0.01, delta, next_s, dots_s);
  EXPECT_TRUE(SameBits(qp, qs));
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(SameBits(dots_p[i], dots_s[i]));
  for (size_t x = 0; x < n; ++x) ASSERT_TRUE(SameBits(next_p[x], next_s[x])) << x;
}

TEST_P(ThreadCountTest, CombineMatchesSerialBitwise) {
  const size_t n = 2 * kChunkSize + 3;
  const auto base = RandomFloats(n, 1);
  std::vector<std::vector<float>> storage;
  std::vector<std::span<const float>> spans;
  for (int i = 0; i < 3; ++i) storage.push_back(RandomFloats(n, 20 + i));
  for (auto& s : storage) spans.push_back(s);
  const std::vector<double> coeffs{1.0, 0.5, -0.25};
  std::vector<float> par(n), ser(n);
  Combine(base, spans, coeffs, 0.3, par);
  serial::Combine(base, spans, coeffs, 0.3, ser);
  for (size_t x = 0; x < n; ++x) ASSERT_EQ(std::bit_cast<uint32_t>(par[x]), std::bit_cast<uint32_t>(ser[x]));
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCountTest, ::testing::Values(1, 2, 3, 4, 8));

TEST(KernelsTest, DotAgreesWithSequentialLoop) {
  const auto a = RandomFloats(100000, 5);
  const auto b = RandomFloats(100000, 6);
  double ref = 0.0;
  for (size_t x = 0; x < a.size(); ++x) ref += static_cast<double>(a[x]) * b[x];
  EXPECT_NEAR(Dot(a, b), ref, 1e-9 * std::abs(ref) + 1e-12);
}

TEST(KernelsTest, ResultIndependentOfThreadCount) {
  const auto a = RandomFloats(50000, 8);
  SetMaxThreads(1);
  const double one = SumSquares(std::span<const float>(a));
  SetMaxThreads(6);
  const double six = SumSquares(std::span<const float>(a));
  SetMaxThreads(0);
  EXPECT_TRUE(SameBits(one, six));
}

TEST(KernelsTest, GramIsSymmetricWithNormsOnDiagonal) {
  std::vector<std::vector<float>> storage{RandomFloats(500, 1), RandomFloats(500, 2)};
  std::vector<std::span<const float>> spans{storage[0], storage[1]};
  std::vector<double> g(4);
  ShiftedGram(spans, {}, g);
  EXPECT_EQ(g[1], g[2]);
  EXPECT_NEAR(g[0], SumSquares(std::span<const float>(storage[0])), 1e-9 * g[0]);
}

TEST(KernelsTest, ElementwiseOps) {
  const std::vector<float> a{1.0f, -2.0f, 3.5f};
  const std::vector<float> b{0.5f, 0.5f, -1.0f};
  std::vector<float> out(3);
  Subtract(a, b, out);
  EXPECT_EQ(out, (std::vector<float>{0.5f, -2.5f, 4.5f}));
  Add(a, b, out);
  EXPECT_EQ(out, (std::vector<float>{1.5f, -1.5f, 2.5f}));
  Scale(a, 2.0, out);
  EXPECT_EQ(out, (std::vector<float>{2.0f, -4.0f, 7.0f}));
  const std::vector<double> shift{1.0, 1.0, 0.5};
  SubtractShift(a, shift, out);
  EXPECT_EQ(out, (std::vector<float>{0.0f, -3.0f, 3.0f}));
  std::vector<std::span<const float>> models{a, b};
  Mean(models, out);
  EXPECT_EQ(out, (std::vector<float>{0.75f, -0.75f, 1.25f}));
}

}  // namespace
}  // namespace taskforge::kernels
