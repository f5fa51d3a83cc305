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

#include <omp.h>

#include <algorithm>
#include <cassert>

namespace taskforge::kernels {
namespace {

size_t NumChunks(size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

std::ptrdiff_t Signed(size_t n) { return static_cast<std::ptrdiff_t>(n); }

// Sums per-chunk partials (nacc values per chunk) in chunk order.
void CombinePartials(const std::vector<double>& partials, size_t nacc, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const size_t chunks = nacc == 0 ? 0 : partials.size() / nacc;
  for (size_t c = 0; c < chunks; ++c) {
    for (size_t a = 0; a < nacc; ++a) out[a] += partials[c * nacc + a];
  }
}

double DotChunk(const float* a, const float* b, size_t begin, size_t end) {
  double acc = 0.0;
  for (size_t x = begin; x < end; ++x) acc += static_cast<double>(a[x]) * static_cast<double>(b[x]);
  return acc;
}

template <typename T>
double SquaresChunk(const T* a, size_t begin, size_t end) {
  double acc = 0.0;
  for (size_t x = begin; x < end; ++x) {
    const double v = static_cast<double>(a[x]);
    acc += v * v;
  }
  return acc;
}

// Accumulates the upper triangle (K(K+1)/2 entries, row-major) of the
// shifted Gram matrix over [begin, end).
void GramChunk(FloatSpans vectors, std::span<const double> shift, size_t begin, size_t end,
               double* acc, std::vector<double>& scratch) {
  const size_t k = vectors.size();
  for (size_t x = begin; x < end; ++x) {
    const double s = shift.empty() ? 0.0 : shift[x];
    for (size_t i = 0; i < k; ++i) scratch[i] = static_cast<double>(vectors[i][x]) - s;
    size_t t = 0;
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = i; j < k; ++j) acc[t++] += scratch[i] * scratch[j];
    }
  }
}

void ExpandTriangle(size_t k, std::span<const double> tri, std::span<double> gram) {
  size_t t = 0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i; j < k; ++j) {
      gram[i * k + j] = tri[t];
      gram[j * k + i] = tri[t];
      ++t;
    }
  }
}

// acc[0..K) gets <family[i], next>, acc[K] gets <next, next>.
void AwdStepChunk(FloatSpans family, std::span<const double> weights, double self_coeff,
                  double step, std::span<const double> delta, std::span<double> next,
                  size_t begin, size_t end, double* acc) {
  const size_t k = family.size();
  for (size_t x = begin; x < end; ++x) {
    double g = self_coeff * delta[x];
    for (size_t i = 0; i < k; ++i) g += weights[i] * static_cast<double>(family[i][x]);
    const double d = delta[x] - step * g;
    next[x] = d;
    for (size_t i = 0; i < k; ++i) acc[i] += static_cast<double>(family[i][x]) * d;
    acc[k] += d * d;
  }
}

void CombineRange(std::span<const float> base, FloatSpans family, std::span<const double> coeffs,
                  double outer, std::span<float> out, size_t begin, size_t end) {
  const size_t k = family.size();
  for (size_t x = begin; x < end; ++x) {
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) acc += coeffs[i] * static_cast<double>(family[i][x]);
    out[x] = static_cast<float>(static_cast<double>(base[x]) + outer * acc);
  }
}

}  // namespace

void SetMaxThreads(int n) {
  static const int kDefault = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : kDefault);
}

int MaxThreads() { return omp_get_max_threads(); }

double Dot(std::span<const float> a, std::span<const float> b) {
  assert(a.size() == b.size());
  const size_t chunks = NumChunks(a.size());
  std::vector<double> partials(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
    const size_t begin = static_cast<size_t>(c) * kChunkSize;
    partials[static_cast<size_t>(c)] =
        DotChunk(a.data(), b.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  double out = 0.0;
  CombinePartials(partials, 1, std::span<double>(&out, 1));
  return out;
}

double SumSquares(std::span<const float> a) {
  const size_t chunks = NumChunks(a.size());
  std::vector<double> partials(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
    const size_t begin = static_cast<size_t>(c) * kChunkSize;
    partials[static_cast<size_t>(c)] =
        SquaresChunk(a.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  double out = 0.0;
  CombinePartials(partials, 1, std::span<double>(&out, 1));
  return out;
}

double SumSquares(std::span<const double> a) {
  const size_t chunks = NumChunks(a.size());
  std::vector<double> partials(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
    const size_t begin = static_cast<size_t>(c) * kChunkSize;
    partials[static_cast<size_t>(c)] =
        SquaresChunk(a.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  double out = 0.0;
  CombinePartials(partials, 1, std::span<double>(&out, 1));
  return out;
}

void ShiftedGram(FloatSpans vectors, std::span<const double> shift, std::span<double> gram) {
  const size_t k = vectors.size();
  if (k == 0) return;
  const size_t n = vectors[0].size();
  const size_t nacc = k * (k + 1) / 2;
  const size_t chunks = NumChunks(n);
  std::vector<double> partials(chunks * nacc, 0.0);
#pragma omp parallel
  {
    std::vector<double> scratch(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
      const size_t begin = static_cast<size_t>(c) * kChunkSize;
      GramChunk(vectors, shift, begin, std::min(n, begin + kChunkSize),
                partials.data() + static_cast<size_t>(c) * nacc, scratch);
    }
  }
  std::vector<double> tri(nacc);
  CombinePartials(partials, nacc, tri);
  ExpandTriangle(k, tri, gram);
}

double AwdStep(FloatSpans family, std::span<const double> weights, double self_coeff,
               double step, std::span<const double> delta, std::span<double> next,
               std::span<double> dots) {
  const size_t k = family.size();
  const size_t n = delta.size();
  const size_t chunks = NumChunks(n);
  std::vector<double> partials(chunks * (k + 1), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
    const size_t begin = static_cast<size_t>(c) * kChunkSize;
    AwdStepChunk(family, weights, self_coeff, step, delta, next, begin,
                 std::min(n, begin + kChunkSize),
                 partials.data() + static_cast<size_t>(c) * (k + 1));
  }
  std::vector<double> sums(k + 1);
  CombinePartials(partials, k + 1, sums);
  std::copy(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(k), dots.begin());
  return sums[k];
}

void GradientCombine(FloatSpans family, std::span<const double> weights, double self_coeff,
                     std::span<const double> delta, std::span<double> out) {
  const size_t k = family.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sx = 0; sx < Signed(delta.size()); ++sx) {
    const auto x = static_cast<size_t>(sx);
    double g = self_coeff * delta[x];
    for (size_t i = 0; i < k; ++i) g += weights[i] * (static_cast<double>(family[i][x]) - delta[x]);
    out[x] = g;
  }
}

void Combine(std::span<const float> base, FloatSpans family, std::span<const double> coeffs,
             double outer, std::span<float> out) {
  const size_t chunks = NumChunks(base.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < Signed(chunks); ++c) {
    const size_t begin = static_cast<size_t>(c) * kChunkSize;
    CombineRange(base, family, coeffs, outer, out, begin, std::min(base.size(), begin + kChunkSize));
  }
}

void Subtract(std::span<const float> a, std::span<const float> b, std::span<float> out) {
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t x = 0; x < Signed(a.size()); ++x) out[x] = a[x] - b[x];
}

void SubtractShift(std::span<const float> a, std::span<const double> shift, std::span<float> out) {
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t x = 0; x < Signed(a.size()); ++x) {
    out[x] = static_cast<float>(static_cast<double>(a[x]) - shift[x]);
  }
}

void Add(std::span<const float> a, std::span<const float> b, std::span<float> out) {
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t x = 0; x < Signed(a.size()); ++x) out[x] = a[x] + b[x];
}

void Scale(std::span<const float> a, double s, std::span<float> out) {
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t x = 0; x < Signed(a.size()); ++x) {
    out[x] = static_cast<float>(s * static_cast<double>(a[x]));
  }
}

void Mean(FloatSpans models, std::span<float> out) {
  const size_t k = models.size();
  const double denom = static_cast<double>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sx = 0; sx < Signed(out.size()); ++sx) {
    const auto x = static_cast<size_t>(sx);
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) acc += static_cast<double>(models[i][x]);
    out[x] = static_cast<float>(acc / denom);
  }
}

namespace serial {

double Dot(std::span<const float> a, std::span<const float> b) {
  double total = 0.0;
  for (size_t begin = 0; begin < a.size(); begin += kChunkSize) {
    total += DotChunk(a.data(), b.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  return total;
}

double SumSquares(std::span<const float> a) {
  double total = 0.0;
  for (size_t begin = 0; begin < a.size(); begin += kChunkSize) {
    total += SquaresChunk(a.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  return total;
}

double SumSquares(std::span<const double> a) {
  double total = 0.0;
  for (size_t begin = 0; begin < a.size(); begin += kChunkSize) {
    total += SquaresChunk(a.data(), begin, std::min(a.size(), begin + kChunkSize));
  }
  return total;
}

void ShiftedGram(FloatSpans vectors, std::span<const double> shift, std::span<double> gram) {
  const size_t k = vectors.size();
  if (k == 0) return;
  const size_t n = vectors[0].size();
  const size_t nacc = k * (k + 1) / 2;
  std::vector<double> tri(nacc, 0.0), chunk(nacc), scratch(k);
  for (size_t begin = 0; begin < n; begin += kChunkSize) {
    std::fill(chunk.begin(), chunk.end(), 0.0);
    GramChunk(vectors, shift, begin, std::min(n, begin + kChunkSize), chunk.data(), scratch);
    for (size_t a = 0; a < nacc; ++a) tri[a] += chunk[a];
  }
  ExpandTriangle(k, tri, gram);
}

double AwdStep(FloatSpans family, std::span<const double> weights, double self_coeff,
               double step, std::span<const double> delta, std::span<double> next,
               std::span<double> dots) {
  const size_t k = family.size();
  const size_t n = delta.size();
  std::vector<double> sums(k + 1, 0.0), chunk(k + 1);
  for (size_t begin = 0; begin < n; begin += kChunkSize) {
    std::fill(chunk.begin(), chunk.end(), 0.0);
    AwdStepChunk(family, weights, self_coeff, step, delta, next, begin,
                 std::min(n, begin + kChunkSize), chunk.data());
    for (size_t a = 0; a <= k; ++a) sums[a] += chunk[a];
  }
  std::copy(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(k), dots.begin());
  return sums[k];
}

void Combine(std::span<const float> base, FloatSpans family, std::span<const double> coeffs,
             double outer, std::span<float> out) {
  CombineRange(base, family, coeffs, outer, out, 0, base.size());
}

}  // namespace serial
}  // namespace taskforge::kernels
