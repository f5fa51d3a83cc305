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

#ifndef TASKFORGE_REPORT_H_
#define TASKFORGE_REPORT_H_

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace taskforge {

inline constexpr const char* kToolVersion = "0.3.0";

// 17 significant digits, enough to round-trip any double.
std::string FormatDouble(double v);
std::string CsvField(const std::string& s);

// Throws IoError.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

struct InputRecord {
  std::string path;
  std::string fingerprint;  // structure hash, hex
  uintmax_t bytes = 0;
};

// One per CLI run, written next to the outputs. `config` is the fully
// resolved configuration and can be fed back through `--config`.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<InputRecord> inputs;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  nlohmann::json ToJson() const;
};

}  // namespace taskforge

#endif  // TASKFORGE_REPORT_H_
