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

#include "skullfx/classifiers/model_io.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>

#include "gtest/gtest.h"
#include "support/blobs.hpp"

namespace skullfx::classifiers {
namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

class ModelIo : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench_ = new testing::BlobBenchmark(testing::MakeBlobBenchmark(40, 20, 6, 3));
    GbdtConfig g;
    g.n_estimators = 8;
    g.max_depth = 3;
    ForestConfig f;
    f.n_trees = 9;
    models_ = new std::vector<AnyModel>{TrainGbdt(bench_->train, bench_->train_labels, g),
                                        TrainForest(bench_->train, bench_->train_labels, f),
                                        TrainLinearSvc(bench_->train, bench_->train_labels, {})};
  }
  static void TearDownTestSuite() {
    delete models_;
    delete bench_;
  }
  static testing::BlobBenchmark* bench_;
  static std::vector<AnyModel>* models_;
};
testing::BlobBenchmark* ModelIo::bench_ = nullptr;
std::vector<AnyModel>* ModelIo::models_ = nullptr;

std::vector<int> Predict(const AnyModel& m, const features::FeatureMatrix& fm) {
  return std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, GbdtModel>) return PredictGbdt(model, fm);
        else if constexpr (std::is_same_v<T, ForestModel>) return PredictForest(model, fm);
        else return PredictSvc(model, fm);
      },
      m);
}

TEST_F(ModelIo, RoundTripIsExact) {
  for (const AnyModel& m : *models_) {
    const auto bytes = EncodeModel(m);
    const AnyModel back = DecodeModel(bytes);
    EXPECT_EQ(back, m);
    EXPECT_EQ(EncodeModel(back), bytes);
    EXPECT_EQ(Predict(back, bench_->test), Predict(m, bench_->test));
  }
}

TEST_F(ModelIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("skullfx_model_" + std::to_string(::getpid()) + ".mdl");
  SaveModel(models_->front(), path);
  EXPECT_EQ(LoadModel(path), models_->front());
  std::filesystem::remove(path);
  EXPECT_EQ(CodeOf([&] { LoadModel(path); }), ErrorCode::kIo);
}

TEST_F(ModelIo, BadMagicAndKind) {
  auto bytes = EncodeModel(models_->at(1));
  bytes[0] = 'X';
  EXPECT_EQ(CodeOf([&] { DecodeModel(bytes); }), ErrorCode::kBadMagic);
  bytes = EncodeModel(models_->at(1));
  bytes[4] = 9;
  EXPECT_EQ(CodeOf([&] { DecodeModel(bytes); }), ErrorCode::kBadMagic);
}

TEST_F(ModelIo, EveryTruncationIsRejected) {
  for (const AnyModel& m : *models_) {
    const auto bytes = EncodeModel(m);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
      const std::span<const std::uint8_t> prefix(bytes.data(), cut);
      ASSERT_THROW(DecodeModel(prefix), Error) << "cut " << cut;
    }
  }
}

TEST_F(ModelIo, TrailingBytesAreRejected) {
  auto bytes = EncodeModel(models_->at(2));
  bytes.push_back(0);
  EXPECT_EQ(CodeOf([&] { DecodeModel(bytes); }), ErrorCode::kDimensionHeaderMismatch);
}

TEST_F(ModelIo, CorruptedBytesNeverCrash) {
  std::mt19937_64 rng(77);
  for (const AnyModel& m : *models_) {
    const auto clean = EncodeModel(m);
    std::uniform_int_distribution<std::size_t> at(13, clean.size() - 1);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int trial = 0; trial < 300; ++trial) {
      auto bytes = clean;
      for (int flips = 0; flips < 3; ++flips) bytes[at(rng)] = static_cast<std::uint8_t>(byte(rng));
      try {
        const AnyModel back = DecodeModel(bytes);
        // Whatever decodes must be safe to evaluate.
        const auto k = std::visit([](const auto& x) { return x.num_features; }, back);
        if (k == static_cast<int>(bench_->test.d())) Predict(back, bench_->test);
      } catch (const Error&) {
      }
    }
  }
}

}  // namespace
}  // namespace skullfx::classifiers
