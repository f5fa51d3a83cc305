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

#ifndef TASKFORGE_KERNELS_H_
#define TASKFORGE_KERNELS_H_

#include <cstddef>
#include <span>
#include <vector>

// Flat-vector kernels. Every reduction splits the input into fixed chunks of
// kChunkSize elements, sums each chunk sequentially in f64 and then combines
// the chunk partials in index order, so the OpenMP kernels and their serial
// references return bitwise-identical results for any thread count.
namespace taskforge::kernels {

inline constexpr size_t kChunkSize = 4096;

using FloatSpans = std::span<const std::span<const float>>;

// Caps the OpenMP team size for subsequent kernels; n <= 0 restores the
// runtime default.
void SetMaxThreads(int n);
int MaxThreads();

double Dot(std::span<const float> a, std::span<const float> b);
double SumSquares(std::span<const float> a);
double SumSquares(std::span<const double> a);

// gram[i*K + j] = <v_i - shift, v_j - shift>, symmetric. `shift` may be empty.
void ShiftedGram(FloatSpans vectors, std::span<const double> shift, std::span<double> gram);

// One fused redundant-vector update:
//   g[x]    = self_coeff * delta[x] + sum_i weights[i] * family[i][x]
//   next[x] = delta[x] - step * g[x]
// and, on the updated vector, dots[i] = <family[i], next> and the returned
// value <next, next>.
double AwdStep(FloatSpans family, std::span<const double> weights, double self_coeff,
               double step, std::span<const double> delta, std::span<double> next,
               std::span<double> dots);

// out[x] = self_coeff * delta[x] + sum_i weights[i] * (family[i][x] - delta[x])
void GradientCombine(FloatSpans family, std::span<const double> weights, double self_coeff,
                     std::span<const double> delta, std::span<double> out);

// out[x] = f32(base[x] + outer * sum_i coeffs[i] * family[i][x]), summed in f64
// in task order.
void Combine(std::span<const float> base, FloatSpans family, std::span<const double> coeffs,
             double outer, std::span<float> out);

// out[x] = f32(a[x] - b[x])
void Subtract(std::span<const float> a, std::span<const float> b, std::span<float> out);
// out[x] = f32(a[x] - shift[x]) with the subtraction in f64.
void SubtractShift(std::span<const float> a, std::span<const double> shift, std::span<float> out);
// out[x] = f32(a[x] + b[x])
void Add(std::span<const float> a, std::span<const float> b, std::span<float> out);
// out[x] = f32(s * a[x])
void Scale(std::span<const float> a, double s, std::span<float> out);
// out[x] = f32(mean_k models[k][x])
void Mean(FloatSpans models, std::span<float> out);

// Serial references with the same chunking and combine order.
namespace serial {

double Dot(std::span<const float> a, std::span<const float> b);
double SumSquares(std::span<const float> a);
double SumSquares(std::span<const double> a);
void ShiftedGram(FloatSpans vectors, std::span<const double> shift, std::span<double> gram);
double AwdStep(FloatSpans family, std::span<const double> weights, double self_coeff,
               double step, std::span<const double> delta, std::span<double> next,
               std::span<double> dots);
void Combine(std::span<const float> base, FloatSpans family, std::span<const double> coeffs,
             double outer, std::span<float> out);

}  // namespace serial

}  // namespace taskforge::kernels

#endif  // TASKFORGE_KERNELS_H_
