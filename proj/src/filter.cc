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

#include <fnmatch.h>

#include <cstring>
#include <iostream>

#include "taskforge/error.h"

namespace taskforge {

FilterSpec FilterSpec::LinearWeights() {
  return FilterSpec{{"*.weight"}, FilterMode::kKeepMatching};
}

void FilterSpec::Validate() const {
  if (patterns.empty()) throw Error(ErrorCode::kInvalidFilter, "filter needs at least one pattern");
  for (const auto& p : patterns) {
    if (p.empty()) throw Error(ErrorCode::kInvalidFilter, "empty glob pattern");
    bool open = false;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] == '\\') {
        ++i;
      } else if (!open && p[i] == '[') {
        open = true;
        // `]` right after `[` or `[!` is a literal member.
        if (i + 1 < p.size() && (p[i + 1] == '!' || p[i + 1] == '^')) ++i;
        if (i + 1 < p.size() && p[i + 1] == ']') ++i;
      } else if (open && p[i] == ']') {
        open = false;
      }
    }
    if (open) throw Error(ErrorCode::kInvalidFilter, "unterminated '[' in pattern '" + p + "'", p);
  }
}

bool GlobMatch(const std::string& pattern, const std::string& name) {
  return fnmatch(pattern.c_str(), name.c_str(), 0) == 0;
}

bool FilterSpec::Matches(const std::string& name) const {
  for (const auto& p : patterns) {
    if (GlobMatch(p, name)) return true;
  }
  return false;
}

ParameterSet FilterParameters(const ParameterSet& ps, const FilterSpec& filter) {
  filter.Validate();
  const bool keep_matching = filter.mode == FilterMode::kKeepMatching;
  std::vector<Layout::Entry> entries;
  std::vector<const TensorInfo*> selected;
  for (const auto& info : ps.layout().tensors()) {
    if (filter.Matches(info.name) == keep_matching) {
      entries.emplace_back(info.name, info.shape);
      selected.push_back(&info);
    }
  }
  if (selected.size() == ps.size()) return ps;
  if (selected.empty()) std::cerr << "warning: filter selected no tensors\n";

  auto layout = Layout::Make(std::move(entries));
  std::vector<float> data;
  data.reserve(layout->numel());
  auto flat = ps.flat();
  for (const TensorInfo* info : selected) {
    data.insert(data.end(), flat.begin() + static_cast<std::ptrdiff_t>(info->offset),
                flat.begin() + static_cast<std::ptrdiff_t>(info->offset + info->numel));
  }
  return ParameterSet(std::move(layout), std::move(data), ps.metadata());
}

}  // namespace taskforge
