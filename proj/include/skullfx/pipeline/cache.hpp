/*
 * Copyright 2026 The skullfx Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Content-addressed tensor cache. Keys hash the DICOM file bytes together
// with the preprocessing settings, so changing either invalidates an entry.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "skullfx/error.hpp"
#include "skullfx/preprocess.hpp"

namespace skullfx::pipeline {

class Fnv1a64 {
 public:
  Fnv1a64& Update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      h_ ^= b;
      h_ *= 0x100000001b3ull;
    }
    return *this;
  }
  Fnv1a64& Update(const std::string& s) {
    return Update({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Only the settings that change the tensor; the debug directory does not.
inline std::string PreprocessKey(const preprocess::PreprocessConfig& cfg) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "threshold_hu=%.17g;out_side=%zu;tilt=%d", cfg.threshold_hu,
                cfg.out_side, cfg.tilt_enabled ? 1 : 0);
  return buf;
}

inline std::string CacheKey(std::span<const std::uint8_t> file_bytes,
                            const preprocess::PreprocessConfig& cfg) {
  return Hex64(Fnv1a64().Update(file_bytes).Update("\n" + PreprocessKey(cfg)).value());
}

// Writes to a sibling temporary and renames, so readers never see a partial
// file.
inline void WriteFileAtomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
}

// Tensor file: "TNS1", u32 side, side*side f32 row-major, little-endian.
inline void SaveTensor(const preprocess::TensorImage& t, const std::filesystem::path& path) {
  std::string bytes = "TNS1";
  const auto side = static_cast<std::uint32_t>(t.side);
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((side >> (8 * i)) & 0xFF));
  bytes.append(reinterpret_cast<const char*>(t.values.data().data()), t.values.size() * sizeof(float));
  WriteFileAtomic(path, bytes);
}

inline preprocess::TensorImage LoadTensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open tensor " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  if (bytes.size() < 8 || bytes.compare(0, 4, "TNS1") != 0) {
    Fail(ErrorCode::kBadMagic, path.string());
  }
  std::uint32_t side = 0;
  for (int i = 0; i < 4; ++i) {
    side |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
  }
  const std::size_t n = std::size_t{side} * side;
  if (bytes.size() != 8 + n * sizeof(float)) {
    Fail(ErrorCode::kTruncatedStore, path.string() + ": size does not match side " +
                                         std::to_string(side));
  }
  preprocess::TensorImage t{side, Matrix<float>(side, side)};
  std::memcpy(t.values.data().data(), bytes.data() + 8, n * sizeof(float));
  return t;
}

}  // namespace skullfx::pipeline
