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

#include "skullfx/classifiers/gbdt.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "support/blobs.hpp"
#include "support/split_oracle.hpp"

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

struct OneDim {
  features::FeatureMatrix fm;
  std::vector<double> x;
  std::vector<int> y;
};

// Two clusters on a line: class 0 around 0, class 1 around 10.
OneDim SeparableLine() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  OneDim d{features::FeatureMatrix{Matrix<float>(40, 1)}, {}, {}};
  for (std::size_t i = 0; i < 40; ++i) {
    const int label = static_cast<int>(i % 2);
    const auto v = static_cast<float>(label * 10.0 + n(rng));
    d.fm.values(i, 0) = v;
    d.x.push_back(v);
    d.y.push_back(label);
  }
  return d;
}

TEST(TrainGbdt, SeparatesLineAndMatchesSplitOraclePerRound) {
  const OneDim d = SeparableLine();
  GbdtConfig cfg;
  cfg.n_estimators = 20;
  cfg.max_depth = 1;
  const GbdtModel m = TrainGbdt(d.fm, d.y, cfg);
  ASSERT_EQ(m.trees.size(), 40u);
  EXPECT_EQ(PredictGbdt(m, d.fm), d.y);

  // Replay boosting with an independent softmax and exhaustive splits.
  std::vector<std::array<double, 2>> margin(40, {0.0, 0.0});
  for (int r = 0; r < 20; ++r) {
    std::vector<std::array<double, 2>> next = margin;
    for (std::size_t k = 0; k < 2; ++k) {
      std::vector<double> g(40), h(40);
      for (std::size_t i = 0; i < 40; ++i) {
        const double e0 = std::exp(margin[i][0]), e1 = std::exp(margin[i][1]);
        const double p = (k == 0 ? e0 : e1) / (e0 + e1);
        g[i] = p - (d.y[i] == static_cast<int>(k) ? 1.0 : 0.0);
        h[i] = p * (1.0 - p);
      }
      const auto want = testing::OracleBestSplit({d.x}, g, h, 1.0, 0.0);
      const Tree& t = m.trees[static_cast<std::size_t>(r) * 2 + k];
      ASSERT_EQ(want.has_value(), !t.nodes[0].is_leaf()) << "round " << r << " class " << k;
      if (want) {
        for (double v : d.x) ASSERT_EQ(v <= want->cut, v < t.nodes[0].threshold) << "round " << r;
      }
      for (std::size_t i = 0; i < 40; ++i) next[i][k] += t.Evaluate(std::array<float, 1>{static_cast<float>(d.x[i])});
    }
    margin = next;
  }
}

TEST(TrainGbdt, SingleClassIsDegenerate) {
  const OneDim d = SeparableLine();
  const std::vector<int> zeros(40, 0);
  EXPECT_EQ(CodeOf([&] { TrainGbdt(d.fm, zeros, {}); }), ErrorCode::kDegenerateLabels);
}

TEST(TrainGbdt, ZeroRoundsGiveUniformRows) {
  const OneDim d = SeparableLine();
  GbdtConfig cfg;
  cfg.n_estimators = 0;
  cfg.num_classes = 3;
  const GbdtModel m = TrainGbdt(d.fm, d.y, cfg);
  const auto p = PredictProbaGbdt(m, d.fm);
  ASSERT_EQ(p.cols(), 3u);
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(TrainGbdt, DimensionMismatchAtPredict) {
  const OneDim d = SeparableLine();
  GbdtConfig cfg;
  cfg.n_estimators = 2;
  const GbdtModel m = TrainGbdt(d.fm, d.y, cfg);
  const features::FeatureMatrix wide{Matrix<float>(3, 2)};
  EXPECT_EQ(CodeOf([&] { PredictProbaGbdt(m, wide); }), ErrorCode::kDimensionMismatch);
}

TEST(TrainGbdt, RejectsNonFiniteFeatures) {
  OneDim d = SeparableLine();
  d.fm.values(3, 0) = std::nanf("");
  EXPECT_THROW(TrainGbdt(d.fm, d.y, {}), Error);
}

TEST(TrainGbdt, TotalTreesToggle) {
  const OneDim d = SeparableLine();
  GbdtConfig cfg;
  cfg.n_estimators = 30;
  cfg.num_classes = 3;
  cfg.estimators_are_total_trees = true;
  const GbdtModel m = TrainGbdt(d.fm, d.y, cfg);
  EXPECT_EQ(m.rounds, 10);
  EXPECT_EQ(m.trees.size(), 30u);
}

class BlobGbdt : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench_ = new testing::BlobBenchmark(testing::MakeBlobBenchmark());
    GbdtConfig cfg;
    cfg.n_estimators = 60;
    model_ = new GbdtModel(TrainGbdt(bench_->train, bench_->train_labels, cfg));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete bench_;
  }
  static testing::BlobBenchmark* bench_;
  static GbdtModel* model_;
};
testing::BlobBenchmark* BlobGbdt::bench_ = nullptr;
GbdtModel* BlobGbdt::model_ = nullptr;

TEST_F(BlobGbdt, RowsArePositiveAndSumToOne) {
  const auto p = PredictProbaGbdt(*model_, bench_->test);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (double v : p.row(i)) {
      EXPECT_GT(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST_F(BlobGbdt, MarginsAreAdditiveAcrossRounds) {
  const auto& fm = bench_->test;
  const std::size_t k = static_cast<std::size_t>(model_->num_classes);
  for (int r = 0; r < model_->rounds; r += 7) {
    const auto before = PredictMarginsGbdt(*model_, fm, r);
    const auto after = PredictMarginsGbdt(*model_, fm, r + 1);
    for (std::size_t i = 0; i < fm.n(); ++i)
      for (std::size_t c = 0; c < k; ++c) {
        const double step = model_->trees[static_cast<std::size_t>(r) * k + c].Evaluate(fm.values.row(i));
        ASSERT_EQ(before(i, c) + step, after(i, c));
      }
  }
}

TEST_F(BlobGbdt, TrainingLossDecreases) {
  ASSERT_EQ(model_->train_loss.size(), static_cast<std::size_t>(model_->rounds));
  EXPECT_LT(model_->train_loss.back(), model_->train_loss.front());
  for (std::size_t r = 1; r < model_->train_loss.size(); ++r)
    EXPECT_LE(model_->train_loss[r], model_->train_loss[r - 1] + 1e-12);
}

TEST_F(BlobGbdt, ThreadedTrainingIsIdentical) {
  GbdtConfig cfg;
  cfg.n_estimators = 5;
  const GbdtModel serial = TrainGbdt(bench_->train, bench_->train_labels, cfg);
  cfg.threads = 3;
  EXPECT_EQ(TrainGbdt(bench_->train, bench_->train_labels, cfg).trees, serial.trees);
}

TEST_F(BlobGbdt, DefaultsReachBenchmarkAccuracy) {
  const GbdtModel m = TrainGbdt(bench_->train, bench_->train_labels, {});
  EXPECT_EQ(m.rounds, 500);
  // Micro-F1 of single-label predictions equals accuracy.
  EXPECT_GE(testing::AccuracyOf(PredictGbdt(m, bench_->test), bench_->test_labels), 0.95);
}

}  // namespace
}  // namespace skullfx::classifiers
