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

#ifndef TASKFORGE_PARAMETER_SET_H_
#define TASKFORGE_PARAMETER_SET_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taskforge {

using Shape = std::vector<int64_t>;

size_t NumElements(const Shape& shape);

struct TensorInfo {
  std::string name;
  Shape shape;
  size_t offset = 0;  // into the flat buffer, in elements
  size_t numel = 0;
};

// Names and shapes of a parameter set, in lexicographic name order. The
// order defines the canonical flattening used by every reduction.
class Layout {
 public:
  using Entry = std::pair<std::string, Shape>;

  // Sorts by name; throws InvalidConfig on duplicate names or negative dims.
  static std::shared_ptr<const Layout> Make(std::vector<Entry> entries);

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  size_t size() const { return tensors_.size(); }
  size_t numel() const { return numel_; }
  uint64_t fingerprint() const { return fingerprint_; }

  // nullptr when absent.
  const TensorInfo* Find(std::string_view name) const;

  bool SameStructure(const Layout& other) const;

 private:
  Layout() = default;

  std::vector<TensorInfo> tensors_;
  size_t numel_ = 0;
  uint64_t fingerprint_ = 0;
};

struct Tensor {
  Shape shape;
  std::vector<float> data;
};

using Metadata = std::map<std::string, std::string>;

// Ordered map name -> f32 tensor, stored as one contiguous buffer laid out by
// `Layout`. Sets that share a layout pointer are aligned by construction.
class ParameterSet {
 public:
  ParameterSet();
  ParameterSet(std::shared_ptr<const Layout> layout, std::vector<float> data,
               Metadata metadata = {});

  static ParameterSet Zeros(std::shared_ptr<const Layout> layout);
  // Throws ShapeMismatch when product(shape) != data.size().
  static ParameterSet FromTensors(std::map<std::string, Tensor> tensors);

  const Layout& layout() const { return *layout_; }
  const std::shared_ptr<const Layout>& layout_ptr() const { return layout_; }

  std::span<const float> flat() const { return data_; }
  std::span<float> flat() { return data_; }

  // Throws MissingTensor.
  std::span<const float> tensor(std::string_view name) const;
  std::span<float> tensor(std::string_view name);

  size_t size() const { return layout_->size(); }
  size_t numel() const { return data_.size(); }
  uint64_t fingerprint() const { return layout_->fingerprint(); }

  const Metadata& metadata() const { return metadata_; }
  Metadata& metadata() { return metadata_; }

  std::map<std::string, Tensor> ToTensors() const;

 private:
  std::shared_ptr<const Layout> layout_;
  std::vector<float> data_;
  Metadata metadata_;
};

// Names, shapes and f32 bit patterns all equal. Metadata is not compared.
bool BitwiseEqual(const ParameterSet& a, const ParameterSet& b);

// Throws MissingTensor{name} (side recorded in the message) or
// ShapeMismatch{name} for the lexicographically first discrepancy.
void ValidateAligned(const ParameterSet& a, const ParameterSet& b);
void ValidateAligned(const Layout& a, const Layout& b);

// Throws NonFinite naming the first offending tensor.
void CheckFinite(const ParameterSet& ps);

std::string FingerprintHex(uint64_t fingerprint);

}  // namespace taskforge

#endif  // TASKFORGE_PARAMETER_SET_H_
