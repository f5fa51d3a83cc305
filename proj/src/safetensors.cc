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

#include "taskforge/safetensors.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "taskforge/error.h"

namespace taskforge {
namespace {

static_assert(std::endian::native == std::endian::little,
              "safetensors payloads are little-endian; big-endian hosts need byte swapping");

using json = nlohmann::json;

constexpr const char* kMetadataKey = "__metadata__";

enum class Dtype { kF32, kF16, kBF16, kF64, kNonFloat };

struct DtypeInfo {
  Dtype dtype;
  size_t size;
};

bool LookupDtype(const std::string& name, DtypeInfo& out) {
  static const std::pair<const char*, DtypeInfo> kTable[] = {
      {"F32", {Dtype::kF32, 4}},       {"F16", {Dtype::kF16, 2}},
      {"BF16", {Dtype::kBF16, 2}},     {"F64", {Dtype::kF64, 8}},
      {"BOOL", {Dtype::kNonFloat, 1}}, {"U8", {Dtype::kNonFloat, 1}},
      {"I8", {Dtype::kNonFloat, 1}},   {"F8_E4M3", {Dtype::kNonFloat, 1}},
      {"F8_E5M2", {Dtype::kNonFloat, 1}}, {"U16", {Dtype::kNonFloat, 2}},
      {"I16", {Dtype::kNonFloat, 2}},  {"U32", {Dtype::kNonFloat, 4}},
      {"I32", {Dtype::kNonFloat, 4}},  {"U64", {Dtype::kNonFloat, 8}},
      {"I64", {Dtype::kNonFloat, 8}},
  };
  for (const auto& [key, info] : kTable) {
    if (name == key) {
      out = info;
      return true;
    }
  }
  return false;
}

struct PendingTensor {
  std::string name;
  Shape shape;
  Dtype dtype;
  size_t begin;
  size_t end;
};

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedHeader, what);
}

uint64_t ReadU64Le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

template <typename T>
T LoadUnaligned(const uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

float HalfToFloat(uint16_t bits) {
  const uint32_t sign = static_cast<uint32_t>(bits & 0x8000u) << 16;
  const uint32_t exp = (bits >> 10) & 0x1fu;
  uint32_t mant = bits & 0x3ffu;
  uint32_t out;
  if (exp == 0) {
    if (mant == 0) {
      out = sign;
    } else {
      // Subnormal half: renormalize into an f32 normal.
      int e = -1;
      do {
        ++e;
        mant <<= 1;
      } while ((mant & 0x400u) == 0);
      out = sign | static_cast<uint32_t>(127 - 15 - e) << 23 | (mant & 0x3ffu) << 13;
    }
  } else if (exp == 0x1f) {
    out = sign | 0x7f800000u | mant << 13;
  } else {
    out = sign | (exp + 127 - 15) << 23 | mant << 13;
  }
  return std::bit_cast<float>(out);
}

float BFloat16ToFloat(uint16_t bits) {
  return std::bit_cast<float>(static_cast<uint32_t>(bits) << 16);
}

ParameterSet ParseCheckpoint(const std::vector<uint8_t>& bytes, const LoadOptions& options) {
  if (bytes.size() < 8) Malformed("file shorter than the 8-byte length prefix");
  const uint64_t header_len = ReadU64Le(bytes.data());
  if (header_len > bytes.size() - 8) Malformed("header length prefix exceeds file size");

  json header;
  try {
    header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const json::exception& e) {
    Malformed(std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) Malformed("header is not a JSON object");

  Metadata metadata;
  std::vector<PendingTensor> pending;
  size_t max_end = 0;
  for (const auto& [name, entry] : header.items()) {
    if (name == kMetadataKey) {
      if (!entry.is_object()) Malformed("__metadata__ must be an object");
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) Malformed("__metadata__ values must be strings");
        metadata[k] = v.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
        !entry.contains("data_offsets")) {
      Malformed("tensor '" + name + "' lacks dtype/shape/data_offsets");
    }
    const auto& jd = entry["dtype"];
    const auto& js = entry["shape"];
    const auto& jo = entry["data_offsets"];
    if (!jd.is_string() || !js.is_array() || !jo.is_array() || jo.size() != 2) {
      Malformed("tensor '" + name + "' has ill-typed fields");
    }
    DtypeInfo dt;
    if (!LookupDtype(jd.get<std::string>(), dt)) {
      throw Error(ErrorCode::kUnsupportedDtype,
                  "tensor '" + name + "' has unknown dtype " + jd.get<std::string>(), name);
    }
    Shape shape;
    for (const auto& d : js) {
      if (!d.is_number_unsigned()) Malformed("tensor '" + name + "' has a bad dimension");
      shape.push_back(d.get<int64_t>());
    }
    if (!jo[0].is_number_unsigned() || !jo[1].is_number_unsigned()) {
      Malformed("tensor '" + name + "' has bad data_offsets");
    }
    const size_t begin = jo[0].get<size_t>();
    const size_t end = jo[1].get<size_t>();
    if (end < begin || end - begin != NumElements(shape) * dt.size) {
      Malformed("tensor '" + name + "' data_offsets disagree with dtype and shape");
    }
    max_end = std::max(max_end, end);
    if (dt.dtype == Dtype::kNonFloat) {
      if (!options.skip_non_float) {
        throw Error(ErrorCode::kUnsupportedDtype,
                    "tensor '" + name + "' has non-float dtype " + jd.get<std::string>(), name);
      }
      continue;
    }
    pending.push_back({name, std::move(shape), dt.dtype, begin, end});
  }

  const size_t buffer_len = bytes.size() - 8 - header_len;
  if (max_end != buffer_len) {
    throw Error(ErrorCode::kTruncatedData,
                "header declares " + std::to_string(max_end) + " data bytes, file holds " +
                    std::to_string(buffer_len));
  }

  std::vector<Layout::Entry> entries;
  entries.reserve(pending.size());
  for (const auto& p : pending) entries.emplace_back(p.name, p.shape);
  auto layout = Layout::Make(std::move(entries));
  std::vector<float> data(layout->numel());
  const uint8_t* buffer = bytes.data() + 8 + header_len;

  const auto count = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    const PendingTensor& p = pending[static_cast<size_t>(t)];
    const TensorInfo* info = layout->Find(p.name);
    float* dst = data.data() + info->offset;
    const uint8_t* src = buffer + p.begin;
    switch (p.dtype) {
      case Dtype::kF32:
        if (info->numel > 0) std::memcpy(dst, src, info->numel * sizeof(float));
        break;
      case Dtype::kF16:
        for (size_t k = 0; k < info->numel; ++k) dst[k] = HalfToFloat(LoadUnaligned<uint16_t>(src + 2 * k));
        break;
      case Dtype::kBF16:
        for (size_t k = 0; k < info->numel; ++k) dst[k] = BFloat16ToFloat(LoadUnaligned<uint16_t>(src + 2 * k));
        break;
      case Dtype::kF64:
        for (size_t k = 0; k < info->numel; ++k) dst[k] = static_cast<float>(LoadUnaligned<double>(src + 8 * k));
        break;
      case Dtype::kNonFloat:
        break;
    }
  }

  ParameterSet ps(std::move(layout), std::move(data), std::move(metadata));
  if (!options.allow_nonfinite) CheckFinite(ps);
  return ps;
}

ParameterSet LoadCheckpoint(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string(), path.string());
  const auto size = static_cast<size_t>(in.tellg());
  in.seekg(0);
  std::vector<uint8_t> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::kIo, "read failed for " + path.string(), path.string());
  }
  return ParseCheckpoint(bytes, options);
}

namespace {

std::string BuildHeader(const ParameterSet& ps) {
  json header = json::object();
  if (!ps.metadata().empty()) header[kMetadataKey] = ps.metadata();
  for (const auto& info : ps.layout().tensors()) {
    header[info.name] = {{"dtype", "F32"},
                         {"shape", info.shape},
                         {"data_offsets", {info.offset * 4, (info.offset + info.numel) * 4}}};
  }
  std::string text = header.dump();
  text.append((8 - text.size() % 8) % 8, ' ');
  return text;
}

void EncodeLength(uint64_t n, uint8_t* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(n >> (8 * i));
}

}  // namespace

std::vector<uint8_t> SerializeCheckpoint(const ParameterSet& ps) {
  const std::string text = BuildHeader(ps);
  std::vector<uint8_t> out(8 + text.size() + ps.numel() * sizeof(float));
  EncodeLength(text.size(), out.data());
  std::memcpy(out.data() + 8, text.data(), text.size());
  if (ps.numel() > 0) {
    std::memcpy(out.data() + 8 + text.size(), ps.flat().data(), ps.numel() * sizeof(float));
  }
  return out;
}

void SaveCheckpoint(const ParameterSet& ps, const std::filesystem::path& path) {
  const std::string text = BuildHeader(ps);
  uint8_t prefix[8];
  EncodeLength(text.size(), prefix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing", path.string());
  out.write(reinterpret_cast<const char*>(prefix), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(ps.flat().data()),
            static_cast<std::streamsize>(ps.numel() * sizeof(float)));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string(), path.string());
}

}  // namespace taskforge
