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

#include "taskforge/filter.h"

#include <gtest/gtest.h>

#include "taskforge/error.h"
#include "test_util.h"

namespace taskforge {
namespace {

ParameterSet Named(const std::vector<std::string>& names) {
  std::map<std::string, Tensor> tensors;
  float v = 1.0f;
  for (const auto& n : names) tensors[n] = {{2}, {v, v + 1}}, v += 2;
  return ParameterSet::FromTensors(tensors);
}

std::vector<std::string> Names(const ParameterSet& ps) {
  std::vector<std::string> out;
  for (const auto& t : ps.layout().tensors()) out.push_back(t.name);
  return out;
}

TEST(GlobMatchTest, Basics) {
  EXPECT_TRUE(GlobMatch("*.weight", "a.weight"));
  EXPECT_TRUE(GlobMatch("*.weight", "blocks.0.attn.weight"));
  EXPECT_FALSE(GlobMatch("*.weight", "a.bias"));
  EXPECT_TRUE(GlobMatch("layer?.w", "layer3.w"));
  EXPECT_TRUE(GlobMatch("layer[0-2].w", "layer1.w"));
  EXPECT_FALSE(GlobMatch("layer[0-2].w", "layer5.w"));
}

TEST(FilterTest, KeepWeightsDropsBias) {
  const auto out = FilterParameters(Named({"a.weight", "a.bias"}), FilterSpec::LinearWeights());
  EXPECT_EQ(Names(out), (std::vector<std::string>{"a.weight"}));
  EXPECT_EQ(out.tensor("a.weight")[0], Named({"a.weight", "a.bias"}).tensor("a.weight")[0]);
}

TEST(FilterTest, KeepStarIsIdentity) {
  const auto ps = Named({"x", "y.z", "w.weight"});
  const auto out = FilterParameters(ps, FilterSpec{{"*"}, FilterMode::kKeepMatching});
  EXPECT_TRUE(BitwiseEqual(ps, out));
}

TEST(FilterTest, DropAttentionFromSix) {
  const auto ps = Named({"enc.attn.q", "enc.attn.k", "enc.mlp.fc1", "enc.mlp.fc2", "enc.ln", "head"});
  const auto out = FilterParameters(ps, FilterSpec{{"*attn*"}, FilterMode::kDropMatching});
  EXPECT_EQ(out.size(), 4u);
  for (const auto& n : Names(out)) EXPECT_EQ(n.find("attn"), std::string::npos);
}

TEST(FilterTest, Idempotent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ps = testing::RandomParameterSet(testing::RandomLayout(rng, 8), rng);
    for (auto mode : {FilterMode::kKeepMatching, FilterMode::kDropMatching}) {
      const FilterSpec f{{"*.weight", "layer[02]*"}, mode};
      const auto once = FilterParameters(ps, f);
      EXPECT_TRUE(BitwiseEqual(once, FilterParameters(once, f)));
    }
  }
}

TEST(FilterTest, EmptyResultIsLegal) {
  const auto out = FilterParameters(Named({"a", "b"}), FilterSpec{{"zzz"}, FilterMode::kKeepMatching});
  EXPECT_EQ(out.size(), 0u);
}

TEST(FilterTest, InvalidSpecs) {
  for (const FilterSpec& f : {FilterSpec{{}, FilterMode::kKeepMatching}, FilterSpec{{"a[bc"}, FilterMode::kKeepMatching}}) {
    try {
      FilterParameters(Named({"a"}), f);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidFilter);
    }
  }
}

}  // namespace
}  // namespace taskforge
