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

#include "taskforge/parameter_set.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "taskforge/error.h"
#include "test_util.h"

namespace taskforge {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(LayoutTest, SortsNamesAndAssignsOffsets) {
  auto layout = Layout::Make({{"b", Shape{3}}, {"a", Shape{2, 2}}, {"c", Shape{}}});
  ASSERT_EQ(layout->size(), 3u);
  EXPECT_EQ(layout->tensors()[0].name, "a");
  EXPECT_EQ(layout->tensors()[0].offset, 0u);
  EXPECT_EQ(layout->tensors()[1].name, "b");
  EXPECT_EQ(layout->tensors()[1].offset, 4u);
  EXPECT_EQ(layout->tensors()[2].numel, 1u);
  EXPECT_EQ(layout->numel(), 8u);
  EXPECT_NE(layout->Find("b"), nullptr);
  EXPECT_EQ(layout->Find("z"), nullptr);
}

TEST(LayoutTest, RejectsDuplicatesAndNegativeDims) {
  EXPECT_EQ(CodeOf([] { Layout::Make(std::vector<Layout::Entry>{{"a", Shape{1}}, {"a", Shape{2}}}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(CodeOf([] { Layout::Make({{"a", Shape{-1}}}); }), ErrorCode::kInvalidConfig);
}

TEST(LayoutTest, FingerprintDependsOnNamesAndShapes) {
  const auto a = Layout::Make({{"w", Shape{2, 2}}});
  EXPECT_EQ(a->fingerprint(), Layout::Make({{"w", Shape{2, 2}}})->fingerprint());
  EXPECT_NE(a->fingerprint(), Layout::Make({{"w", Shape{4}}})->fingerprint());
  EXPECT_NE(a->fingerprint(), Layout::Make({{"v", Shape{2, 2}}})->fingerprint());
}

TEST(ParameterSetTest, FromTensorsRoundTrip) {
  std::map<std::string, Tensor> tensors{{"w", {{2, 2}, {1, 2, 3, 4}}}, {"b", {{2}, {5, 6}}}};
  const ParameterSet ps = ParameterSet::FromTensors(tensors);
  EXPECT_EQ(ps.numel(), 6u);
  const auto w = ps.tensor("w");
  EXPECT_EQ(std::vector<float>(w.begin(), w.end()), (std::vector<float>{1, 2, 3, 4}));
  const auto back = ps.ToTensors();
  EXPECT_EQ(back.at("b").data, (std::vector<float>{5, 6}));
  EXPECT_EQ(back.at("w").shape, (Shape{2, 2}));
}

TEST(ParameterSetTest, SizeMismatchThrows) {
  EXPECT_EQ(CodeOf([] { ParameterSet::FromTensors({{"w", {{2, 2}, {1, 2, 3}}}}); }), ErrorCode::kShapeMismatch);
}

TEST(ParameterSetTest, MissingTensorNamesSubject) {
  const ParameterSet ps = ParameterSet::FromTensors({{"w", {{1}, {1}}}});
  try {
    ps.tensor("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTensor);
    EXPECT_EQ(e.subject(), "nope");
  }
}

TEST(ValidateAlignedTest, IdenticalStructureIsOk) {
  const auto a = ParameterSet::FromTensors({{"w", {{2, 2}, {1, 2, 3, 4}}}});
  const auto b = ParameterSet::FromTensors({{"w", {{2, 2}, {0, 0, 0, 0}}}});
  EXPECT_NO_THROW(ValidateAligned(a, b));
}

TEST(ValidateAlignedTest, MissingTensor) {
  const auto a = ParameterSet::FromTensors({{"w", {{1}, {1}}}, {"v", {{1}, {1}}}});
  const auto b = ParameterSet::FromTensors({{"v", {{1}, {1}}}});
  try {
    ValidateAligned(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTensor);
    EXPECT_EQ(e.subject(), "w");
  }
}

TEST(ValidateAlignedTest, ShapeMismatch) {
  const auto a = ParameterSet::FromTensors({{"w", {{2, 2}, {1, 2, 3, 4}}}});
  const auto b = ParameterSet::FromTensors({{"w", {{4}, {1, 2, 3, 4}}}});
  try {
    ValidateAligned(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_EQ(e.subject(), "w");
  }
}

TEST(CheckFiniteTest, FlagsNanAndInf) {
  auto ps = ParameterSet::FromTensors({{"a", {{1}, {1}}}, {"b", {{2}, {0, 0}}}});
  EXPECT_NO_THROW(CheckFinite(ps));
  ps.tensor("b")[1] = std::numeric_limits<float>::infinity();
  try {
    CheckFinite(ps);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_EQ(e.subject(), "b");
  }
}

TEST(BitwiseEqualTest, DistinguishesSignedZero) {
  auto a = ParameterSet::FromTensors({{"w", {{1}, {0.0f}}}});
  auto b = ParameterSet::FromTensors({{"w", {{1}, {-0.0f}}}});
  EXPECT_FALSE(BitwiseEqual(a, b));
  EXPECT_TRUE(BitwiseEqual(a, a));
}

TEST(FingerprintHexTest, SixteenDigits) {
  EXPECT_EQ(FingerprintHex(0xabcULL), "0000000000000abc");
}

}  // namespace
}  // namespace taskforge
