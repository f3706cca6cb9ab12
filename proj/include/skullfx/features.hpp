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

// Image -> feature-vector extraction and the binary feature store.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <iterator>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skullfx/error.hpp"
#include "skullfx/matrix.hpp"
#include "skullfx/preprocess.hpp"

#ifdef SKULLFX_WITH_ONNXRUNTIME
#include <onnxruntime_cxx_api.h>
#endif

namespace skullfx::features {

static_assert(std::endian::native == std::endian::little,
              "binary stores are written with native little-endian layout");

// N x D feature rows; row i belongs to sample i of the originating dataset.
struct FeatureMatrix {
  Matrix<float> values;

  std::size_t n() const { return values.rows(); }
  std::size_t d() const { return values.cols(); }

  bool operator==(const FeatureMatrix&) const = default;
};

enum class Backend { kInterchangeModel, kToy };

class ExtractorBackend {
 public:
  virtual ~ExtractorBackend() = default;
  virtual void Extract(const preprocess::TensorImage& img, std::span<float> out) const = 0;
};

// Immutable after construction; copies share the backend.
class FeatureExtractor {
 public:
  FeatureExtractor(std::string name, std::size_t input_side, std::size_t output_dim,
                   Backend backend, std::shared_ptr<const ExtractorBackend> impl)
      : name_(std::move(name)),
        input_side_(input_side),
        output_dim_(output_dim),
        backend_(backend),
        impl_(std::move(impl)) {}

  const std::string& name() const { return name_; }
  std::size_t input_side() const { return input_side_; }
  std::size_t output_dim() const { return output_dim_; }
  Backend backend() const { return backend_; }

  std::vector<float> operator()(const preprocess::TensorImage& img) const {
    std::vector<float> out(output_dim_);
    Run(img, out);
    return out;
  }

  void Run(const preprocess::TensorImage& img, std::span<float> out) const {
    if (img.side != input_side_ || img.values.rows() != input_side_ ||
        img.values.cols() != input_side_) {
      Fail(ErrorCode::kShapeMismatch, "image side " + std::to_string(img.side) +
                                          ", extractor expects " +
                                          std::to_string(input_side_));
    }
    impl_->Extract(img, out);
  }

 private:
  std::string name_;
  std::size_t input_side_;
  std::size_t output_dim_;
  Backend backend_;
  std::shared_ptr<const ExtractorBackend> impl_;
};

namespace detail {

// 4x4 average pool -> fixed Gaussian projection -> ReLU.
class ToyBackend final : public ExtractorBackend {
 public:
  ToyBackend(std::uint64_t seed, std::size_t d, std::size_t input_side)
      : pooled_side_(input_side / 4),
        weights_(d, pooled_side_ * pooled_side_),
        bias_(d) {
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, weights_.cols())));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (float& w : weights_.data()) w = static_cast<float>(normal(rng) * scale);
    for (float& b : bias_) b = static_cast<float>(normal(rng) * 0.1);
  }

  void Extract(const preprocess::TensorImage& img, std::span<float> out) const override {
    std::vector<double> pooled(pooled_side_ * pooled_side_, 0.0);
    for (std::size_t pr = 0; pr < pooled_side_; ++pr) {
      for (std::size_t pc = 0; pc < pooled_side_; ++pc) {
        double acc = 0.0;
        for (std::size_t r = 0; r < 4; ++r) {
          for (std::size_t c = 0; c < 4; ++c) acc += img.values(pr * 4 + r, pc * 4 + c);
        }
        pooled[pr * pooled_side_ + pc] = acc / 16.0;
      }
    }
    for (std::size_t k = 0; k < weights_.rows(); ++k) {
      double acc = bias_[k];
      const auto w = weights_.row(k);
      for (std::size_t j = 0; j < pooled.size(); ++j) acc += static_cast<double>(w[j]) * pooled[j];
      out[k] = static_cast<float>(std::max(0.0, acc));
    }
  }

 private:
  std::size_t pooled_side_;
  Matrix<float> weights_;
  std::vector<float> bias_;
};

}  // namespace detail

// Desk-scale stand-in for a pretrained CNN. Weights depend on `seed` only.
inline FeatureExtractor ToyExtractor(std::uint64_t seed, std::size_t d,
                                     std::size_t input_side = 224) {
  if (d == 0) Fail(ErrorCode::kShapeMismatch, "toy extractor needs d >= 1");
  if (input_side < 4) Fail(ErrorCode::kShapeMismatch, "toy extractor needs input_side >= 4");
  return FeatureExtractor("toy", input_side, d, Backend::kToy,
                          std::make_shared<detail::ToyBackend>(seed, d, input_side));
}

// Describes an exported CNN truncated at its pooled-feature node.
struct ModelSidecar {
  std::string model_path;
  std::string input_name;
  std::size_t input_side = 224;
  std::string output_name;
  std::size_t output_dim = 2048;
};

inline ModelSidecar LoadSidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open sidecar " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    ModelSidecar s;
    s.model_path = j.at("model_path").get<std::string>();
    s.input_name = j.at("input_name").get<std::string>();
    s.input_side = j.at("input_side").get<std::size_t>();
    s.output_name = j.at("output_name").get<std::string>();
    s.output_dim = j.at("output_dim").get<std::size_t>();
    // Relative model paths resolve against the sidecar's directory.
    std::filesystem::path model(s.model_path);
    if (model.is_relative()) s.model_path = (path.parent_path() / model).string();
    return s;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, "sidecar " + path.string() + ": " + e.what());
  }
}

#ifdef SKULLFX_WITH_ONNXRUNTIME
namespace detail {

class InterchangeBackend final : public ExtractorBackend {
 public:
  explicit InterchangeBackend(const ModelSidecar& sidecar)
      : sidecar_(sidecar),
        env_(ORT_LOGGING_LEVEL_WARNING, "skullfx"),
        session_(env_, sidecar.model_path.c_str(), Ort::SessionOptions{}) {}

  void Extract(const preprocess::TensorImage& img, std::span<float> out) const override {
    const std::size_t plane = img.side * img.side;
    // Grayscale replicated into the three channels the network expects.
    std::vector<float> input(3 * plane);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      std::copy(img.values.data().begin(), img.values.data().end(),
                input.begin() + static_cast<std::ptrdiff_t>(ch * plane));
    }
    const std::array<std::int64_t, 4> shape{1, 3, static_cast<std::int64_t>(img.side),
                                            static_cast<std::int64_t>(img.side)};
    auto mem = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);
    Ort::Value tensor = Ort::Value::CreateTensor<float>(mem, input.data(), input.size(),
                                                        shape.data(), shape.size());
    const char* in_names[] = {sidecar_.input_name.c_str()};
    const char* out_names[] = {sidecar_.output_name.c_str()};
    auto result = session_.Run(Ort::RunOptions{nullptr}, in_names, &tensor, 1, out_names, 1);
    const float* data = result.front().GetTensorData<float>();
    const auto count = result.front().GetTensorTypeAndShapeInfo().GetElementCount();
    if (count != out.size()) {
      Fail(ErrorCode::kShapeMismatch, "model produced " + std::to_string(count) +
                                          " values, sidecar declares " +
                                          std::to_string(out.size()));
    }
    std::copy(data, data + count, out.begin());
  }

 private:
  ModelSidecar sidecar_;
  Ort::Env env_;
  mutable Ort::Session session_;
};

}  // namespace detail
#endif

inline FeatureExtractor InterchangeExtractor(const ModelSidecar& sidecar) {
#ifdef SKULLFX_WITH_ONNXRUNTIME
  return FeatureExtractor("interchange:" + sidecar.model_path, sidecar.input_side,
                          sidecar.output_dim, Backend::kInterchangeModel,
                          std::make_shared<detail::InterchangeBackend>(sidecar));
#else
  Fail(ErrorCode::kBackendUnavailable,
       "built without ONNX Runtime; cannot load " + sidecar.model_path);
#endif
}

// Row i of the result is the extractor's output for images[i]. With
// threads > 1 rows are computed in contiguous chunks; output is identical.
inline FeatureMatrix ExtractFeatures(std::span<const preprocess::TensorImage> images,
                                     const FeatureExtractor& ex, unsigned threads = 1) {
  FeatureMatrix fm{Matrix<float>(images.size(), ex.output_dim())};
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) ex.Run(images[i], fm.values.row(i));
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(images.size())));
  if (threads <= 1) {
    work(0, images.size());
    return fm;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (images.size() + threads - 1) / threads;
  for (std::size_t b = 0; b < images.size(); b += chunk) {
    jobs.push_back(std::async(std::launch::async, work, b, std::min(images.size(), b + chunk)));
  }
  for (auto& j : jobs) j.get();
  return fm;
}

// Feature store layout: "FVS1", u32 N, u32 D, N*D f32 row-major, N u8 labels.
// All integers and floats little-endian.
inline void SaveFeatureStore(const FeatureMatrix& fm, std::span<const int> labels,
                             const std::filesystem::path& path) {
  if (labels.size() != fm.n()) {
    Fail(ErrorCode::kDimensionHeaderMismatch,
         std::to_string(labels.size()) + " labels for " + std::to_string(fm.n()) + " rows");
  }
  for (float v : fm.values.data()) {
    if (!std::isfinite(v)) Fail(ErrorCode::kShapeMismatch, "non-finite feature value");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  auto put_u32 = [&](std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                       static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
    out.write(b, 4);
  };
  out.write("FVS1", 4);
  put_u32(static_cast<std::uint32_t>(fm.n()));
  put_u32(static_cast<std::uint32_t>(fm.d()));
  out.write(reinterpret_cast<const char*>(fm.values.data().data()),
            static_cast<std::streamsize>(fm.values.size() * sizeof(float)));
  for (int l : labels) {
    if (l < 0 || l > 255) Fail(ErrorCode::kLabelOutOfRange, std::to_string(l));
    out.put(static_cast<char>(static_cast<std::uint8_t>(l)));
  }
  if (!out) Fail(ErrorCode::kIo, "short write to " + path.string());
}

struct FeatureStore {
  FeatureMatrix features;
  std::vector<int> labels;
};

inline FeatureStore LoadFeatureStore(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FVS1", 4) != 0) {
    Fail(ErrorCode::kBadMagic, path.string());
  }
  if (bytes.size() < 12) Fail(ErrorCode::kTruncatedStore, "header cut short");
  auto u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(bytes[at]) | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
  };
  const std::size_t n = u32(4), d = u32(8);
  const std::size_t expected = 12 + n * d * sizeof(float) + n;
  if (bytes.size() < expected) {
    Fail(ErrorCode::kTruncatedStore, "header declares " + std::to_string(n) + "x" +
                                         std::to_string(d) + ", file has " +
                                         std::to_string(bytes.size()) + " bytes");
  }
  if (bytes.size() > expected) {
    Fail(ErrorCode::kDimensionHeaderMismatch,
         std::to_string(bytes.size() - expected) + " trailing bytes after declared payload");
  }
  FeatureStore store{FeatureMatrix{Matrix<float>(n, d)}, std::vector<int>(n)};
  std::memcpy(store.features.values.data().data(), bytes.data() + 12, n * d * sizeof(float));
  for (std::size_t i = 0; i < n; ++i) store.labels[i] = bytes[12 + n * d * sizeof(float) + i];
  return store;
}

}  // namespace skullfx::features
