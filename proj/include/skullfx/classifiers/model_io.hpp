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

// Versioned binary container for trained models:
//   "MDL1" | u8 kind | u64 payload length | payload
// The payload is a canonical little-endian encoding of the model fields, so
// save -> load -> save reproduces the file byte for byte.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skullfx/classifiers/forest.hpp"
#include "skullfx/classifiers/gbdt.hpp"
#include "skullfx/classifiers/linear_svc.hpp"
#include "skullfx/error.hpp"

namespace skullfx::classifiers {

enum class ModelKind : std::uint8_t { kGbdt = 1, kForest = 2, kLinearSvc = 3 };

using AnyModel = std::variant<GbdtModel, ForestModel, LinearSvcModel>;

namespace detail {

class Encoder {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void WriteTree(const classifiers::Tree& t) {
    U32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      I32(n.feature);
      F64(n.threshold);
      I32(n.left);
      I32(n.right);
      F64(n.value);
    }
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t U8() {
    Need(1);
    return in_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  // Element count whose payload of `each` bytes must still fit.
  std::uint32_t Count(std::size_t each) {
    const std::uint32_t n = U32();
    Need(static_cast<std::size_t>(n) * each);
    return n;
  }
  // Children always follow their parent, which also rules out cycles.
  classifiers::Tree ReadTree(int num_features) {
    classifiers::Tree t;
    const std::uint32_t count = Count(28);
    if (count == 0) Fail(ErrorCode::kDimensionHeaderMismatch, "empty tree");
    t.nodes.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      auto& n = t.nodes[i];
      n.feature = I32();
      n.threshold = F64();
      n.left = I32();
      n.right = I32();
      n.value = F64();
      if (n.is_leaf()) continue;
      const auto in_range = [&](std::int32_t c) {
        return c > static_cast<std::int32_t>(i) && static_cast<std::uint32_t>(c) < count;
      };
      if (n.feature >= num_features || !in_range(n.left) || !in_range(n.right)) {
        Fail(ErrorCode::kDimensionHeaderMismatch, "tree node " + std::to_string(i) + " is malformed");
      }
    }
    return t;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) Fail(ErrorCode::kTruncatedStore, "model payload cut short");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ModelKind KindOf(const AnyModel& m) {
  return static_cast<ModelKind>(m.index() + 1);
}

inline std::vector<std::uint8_t> EncodeModel(const AnyModel& model) {
  detail::Encoder e;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        e.U32(static_cast<std::uint32_t>(m.num_classes));
        e.U32(static_cast<std::uint32_t>(m.num_features));
        if constexpr (std::is_same_v<T, GbdtModel>) {
          e.U32(static_cast<std::uint32_t>(m.rounds));
          e.F64(m.learning_rate);
          e.F64(m.lambda);
          e.F64(m.gamma);
          e.F64(m.base_score);
          e.U32(static_cast<std::uint32_t>(m.trees.size()));
          for (const auto& t : m.trees) e.WriteTree(t);
          e.U32(static_cast<std::uint32_t>(m.train_loss.size()));
          for (double v : m.train_loss) e.F64(v);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          e.U32(static_cast<std::uint32_t>(m.max_features));
          e.U32(static_cast<std::uint32_t>(m.trees.size()));
          for (const auto& t : m.trees) e.WriteTree(t);
        } else {
          e.F64(m.C);
          for (double v : m.weights.data()) e.F64(v);
        }
      },
      model);

  detail::Encoder framed;
  for (char c : std::string_view("MDL1")) framed.U8(static_cast<std::uint8_t>(c));
  framed.U8(static_cast<std::uint8_t>(KindOf(model)));
  framed.U64(e.bytes().size());
  auto& out = framed.bytes();
  out.insert(out.end(), e.bytes().begin(), e.bytes().end());
  return out;
}

inline AnyModel DecodeModel(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "MDL1", 4) != 0) {
    Fail(ErrorCode::kBadMagic, "not a model container");
  }
  detail::Decoder header(bytes.subspan(4));
  const std::uint8_t kind = header.U8();
  const std::uint64_t length = header.U64();
  if (header.remaining() < length) Fail(ErrorCode::kTruncatedStore, "model payload cut short");
  if (header.remaining() > length) {
    Fail(ErrorCode::kDimensionHeaderMismatch, "trailing bytes after model payload");
  }
  detail::Decoder d(bytes.subspan(bytes.size() - length));
  const std::uint32_t k_raw = d.U32(), f_raw = d.U32();
  if (k_raw < 2 || k_raw > 255 || f_raw > (1u << 24)) {
    Fail(ErrorCode::kDimensionHeaderMismatch, "implausible class or feature count");
  }
  const auto k = static_cast<int>(k_raw);
  const auto f = static_cast<int>(f_raw);
  AnyModel result;
  switch (static_cast<ModelKind>(kind)) {
    case ModelKind::kGbdt: {
      GbdtModel m;
      m.num_classes = k;
      m.num_features = f;
      m.rounds = static_cast<int>(d.U32());
      m.learning_rate = d.F64();
      m.lambda = d.F64();
      m.gamma = d.F64();
      m.base_score = d.F64();
      m.trees.resize(d.Count(4));
      for (auto& t : m.trees) t = d.ReadTree(f);
      m.train_loss.resize(d.Count(8));
      for (double& v : m.train_loss) v = d.F64();
      if (m.trees.size() != static_cast<std::size_t>(m.rounds) * static_cast<std::size_t>(k)) {
        Fail(ErrorCode::kDimensionHeaderMismatch, "tree count is not rounds x classes");
      }
      result = std::move(m);
      break;
    }
    case ModelKind::kForest: {
      ForestModel m;
      m.num_classes = k;
      m.num_features = f;
      m.max_features = static_cast<int>(d.U32());
      m.trees.resize(d.Count(4));
      for (auto& t : m.trees) t = d.ReadTree(f);
      for (const auto& t : m.trees)
        for (const auto& n : t.nodes)
          if (n.is_leaf() && (n.value < 0 || n.value >= k)) {
            Fail(ErrorCode::kDimensionHeaderMismatch, "forest leaf is not a class id");
          }
      result = std::move(m);
      break;
    }
    case ModelKind::kLinearSvc: {
      LinearSvcModel m;
      m.num_classes = k;
      m.num_features = f;
      m.C = d.F64();
      if (d.remaining() != static_cast<std::size_t>(k) * (static_cast<std::size_t>(f) + 1) * 8) {
        Fail(ErrorCode::kDimensionHeaderMismatch, "weight block does not match K x (D + 1)");
      }
      m.weights = Matrix<double>(static_cast<std::size_t>(k), static_cast<std::size_t>(f) + 1);
      for (double& v : m.weights.data()) v = d.F64();
      result = std::move(m);
      break;
    }
    default:
      Fail(ErrorCode::kBadMagic, "unknown model kind " + std::to_string(kind));
  }
  if (d.remaining() != 0) {
    Fail(ErrorCode::kDimensionHeaderMismatch, "unused bytes inside model payload");
  }
  return result;
}

inline void SaveModel(const AnyModel& model, const std::filesystem::path& path) {
  const auto bytes = EncodeModel(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline AnyModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  return DecodeModel(bytes);
}

}  // namespace skullfx::classifiers
