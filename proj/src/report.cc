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

#include "taskforge/report.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "taskforge/error.h"

namespace taskforge {

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing", path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string(), path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what(), path.string());
  }
}

nlohmann::json RunManifest::ToJson() const {
  nlohmann::json j;
  j["command"] = command;
  j["tool_version"] = kToolVersion;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : inputs) {
    j["inputs"].push_back({{"path", in.path}, {"fingerprint", in.fingerprint}, {"bytes", in.bytes}});
  }
  j["outputs"] = outputs;
  j["wall_seconds"] = wall_seconds;
  return j;
}

}  // namespace taskforge
