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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdio>

#include "taskforge/error.h"

namespace taskforge {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

void FnvMix(uint64_t& h, const void* bytes, size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void FnvMixU64(uint64_t& h, uint64_t v) {
  unsigned char le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(v >> (8 * i));
  FnvMix(h, le, 8);
}

}  // namespace

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (int64_t d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::shared_ptr<const Layout> Layout::Make(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::shared_ptr<Layout> layout(new Layout());
  uint64_t h = kFnvOffset;
  size_t offset = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    auto& [name, shape] = entries[i];
    if (i > 0 && layout->tensors_.back().name == name) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate tensor name '" + name + "'", name);
    }
    for (int64_t d : shape) {
      if (d < 0) {
        throw Error(ErrorCode::kInvalidConfig, "negative dimension in '" + name + "'", name);
      }
    }
    FnvMix(h, name.data(), name.size());
    FnvMix(h, "\0", 1);
    FnvMixU64(h, shape.size());
    for (int64_t d : shape) FnvMixU64(h, static_cast<uint64_t>(d));

    TensorInfo info;
    info.numel = NumElements(shape);
    info.offset = offset;
    info.name = std::move(name);
    info.shape = std::move(shape);
    offset += info.numel;
    layout->tensors_.push_back(std::move(info));
  }
  layout->numel_ = offset;
  layout->fingerprint_ = h;
  return layout;
}

const TensorInfo* Layout::Find(std::string_view name) const {
  auto it = std::lower_bound(
      tensors_.begin(), tensors_.end(), name,
      [](const TensorInfo& t, std::string_view n) { return t.name < n; });
  if (it == tensors_.end() || it->name != name) return nullptr;
  return &*it;
}

bool Layout::SameStructure(const Layout& other) const {
  if (this == &other) return true;
  if (tensors_.size() != other.tensors_.size()) return false;
  for (size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name ||
        tensors_[i].shape != other.tensors_[i].shape) {
      return false;
    }
  }
  return true;
}

ParameterSet::ParameterSet() : layout_(Layout::Make({})) {}

ParameterSet::ParameterSet(std::shared_ptr<const Layout> layout,
                           std::vector<float> data, Metadata metadata)
    : layout_(std::move(layout)),
      data_(std::move(data)),
      metadata_(std::move(metadata)) {
  if (data_.size() != layout_->numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "buffer holds " + std::to_string(data_.size()) +
                    " elements, layout needs " + std::to_string(layout_->numel()));
  }
}

ParameterSet ParameterSet::Zeros(std::shared_ptr<const Layout> layout) {
  std::vector<float> data(layout->numel(), 0.0f);
  return ParameterSet(std::move(layout), std::move(data));
}

ParameterSet ParameterSet::FromTensors(std::map<std::string, Tensor> tensors) {
  std::vector<Layout::Entry> entries;
  entries.reserve(tensors.size());
  size_t total = 0;
  for (const auto& [name, t] : tensors) {
    if (NumElements(t.shape) != t.data.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor '" + name + "' shape does not match its data length", name);
    }
    entries.emplace_back(name, t.shape);
    total += t.data.size();
  }
  auto layout = Layout::Make(std::move(entries));
  std::vector<float> data;
  data.reserve(total);
  // std::map iterates in the same lexicographic order as Layout.
  for (const auto& [name, t] : tensors) data.insert(data.end(), t.data.begin(), t.data.end());
  return ParameterSet(std::move(layout), std::move(data));
}

std::span<const float> ParameterSet::tensor(std::string_view name) const {
  const TensorInfo* info = layout_->Find(name);
  if (info == nullptr) {
    throw Error(ErrorCode::kMissingTensor, "no tensor named '" + std::string(name) + "'",
                std::string(name));
  }
  return std::span<const float>(data_).subspan(info->offset, info->numel);
}

std::span<float> ParameterSet::tensor(std::string_view name) {
  const TensorInfo* info = layout_->Find(name);
  if (info == nullptr) {
    throw Error(ErrorCode::kMissingTensor, "no tensor named '" + std::string(name) + "'",
                std::string(name));
  }
  return std::span<float>(data_).subspan(info->offset, info->numel);
}

std::map<std::string, Tensor> ParameterSet::ToTensors() const {
  std::map<std::string, Tensor> out;
  for (const auto& info : layout_->tensors()) {
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(info.offset);
    out[info.name] = Tensor{info.shape, std::vector<float>(first, first + info.numel)};
  }
  return out;
}

bool BitwiseEqual(const ParameterSet& a, const ParameterSet& b) {
  if (!a.layout().SameStructure(b.layout())) return false;
  if (a.numel() == 0) return true;
  return std::memcmp(a.flat().data(), b.flat().data(), a.numel() * sizeof(float)) == 0;
}

void ValidateAligned(const Layout& a, const Layout& b) {
  if (&a == &b) return;
  const auto& ta = a.tensors();
  const auto& tb = b.tensors();
  size_t i = 0, j = 0;
  while (i < ta.size() || j < tb.size()) {
    if (j == tb.size() || (i < ta.size() && ta[i].name < tb[j].name)) {
      throw Error(ErrorCode::kMissingTensor,
                  "tensor '" + ta[i].name + "' missing from second operand", ta[i].name);
    }
    if (i == ta.size() || tb[j].name < ta[i].name) {
      throw Error(ErrorCode::kMissingTensor,
                  "tensor '" + tb[j].name + "' missing from first operand", tb[j].name);
    }
    if (ta[i].shape != tb[j].shape) {
      throw Error(ErrorCode::kShapeMismatch, "tensor '" + ta[i].name + "' has different shapes",
                  ta[i].name);
    }
    ++i;
    ++j;
  }
}

void ValidateAligned(const ParameterSet& a, const ParameterSet& b) {
  ValidateAligned(a.layout(), b.layout());
}

void CheckFinite(const ParameterSet& ps) {
  auto flat = ps.flat();
  for (const auto& info : ps.layout().tensors()) {
    for (size_t k = 0; k < info.numel; ++k) {
      if (!std::isfinite(flat[info.offset + k])) {
        throw Error(ErrorCode::kNonFinite, "tensor '" + info.name + "' has non-finite values",
                    info.name);
      }
    }
  }
}

std::string FingerprintHex(uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

}  // namespace taskforge
