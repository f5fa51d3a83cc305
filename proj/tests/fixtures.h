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

#ifndef TASKFORGE_TESTS_FIXTURES_H_
#define TASKFORGE_TESTS_FIXTURES_H_

// Final mean |cos| after 200 steps of plain f64 gradient descent (rate 0.05)
// on the pair (1, 0.5), (0.5, 1), computed by an independent NumPy
// implementation of the direct gradient.
namespace taskforge {

inline constexpr double kTwoVectorFinalCos = 0.308650192548251;
inline constexpr double kTwoVectorFinalCosWithNorm = 0.396428352298935;

// Four-task correlated family (seed 404, dim 512, unit scale): mean |cos|
// before solving and after 1000 steps at rate 1e-3, alpha 1e-4. Recorded on
// the first verified run.
inline constexpr double kEfficacyInitialCos = 0.59954862000200604;
inline constexpr double kEfficacyFinalCos = 0.22154902445820279;

}  // namespace taskforge

#endif  // TASKFORGE_TESTS_FIXTURES_H_
