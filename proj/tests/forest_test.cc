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

#include "skullfx/classifiers/forest.hpp"

#include <algorithm>
#include <random>

#include "gtest/gtest.h"
#include "support/blobs.hpp"

namespace skullfx::classifiers {
namespace {

TEST(PluralityVote, Majority) {
  const std::vector<std::size_t> votes{120, 50, 30};
  EXPECT_EQ(PluralityVote(votes), 0);
  const std::vector<std::size_t> later{10, 50, 140};
  EXPECT_EQ(PluralityVote(later), 2);
}

TEST(PluralityVote, TiesGoToSmallestId) {
  const std::vector<std::size_t> votes{100, 100, 0};
  EXPECT_EQ(PluralityVote(votes), 0);
  const std::vector<std::size_t> back{0, 100, 100};
  EXPECT_EQ(PluralityVote(back), 1);
}

TEST(TrainForest, DegenerateLabels) {
  const features::FeatureMatrix fm{Matrix<float>(4, 2, 1.0f)};
  const std::vector<int> same(4, 2);
  EXPECT_THROW(TrainForest(fm, same, {}), Error);
  const features::FeatureMatrix one{Matrix<float>(1, 2, 1.0f)};
  EXPECT_THROW(TrainForest(one, std::vector<int>{0}, {}), Error);
}

TEST(TrainForest, DefaultFeatureSubset) {
  const features::FeatureMatrix fm{Matrix<float>(6, 20)};
  const std::vector<int> y{0, 1, 2, 0, 1, 2};
  ForestConfig cfg;
  cfg.n_trees = 3;
  EXPECT_EQ(TrainForest(fm, y, cfg).max_features, 4);
}

TEST(TrainForest, FitsTrainingDataOnDistinctPoints) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0, 1);
  features::FeatureMatrix fm{Matrix<float>(60, 3)};
  for (float& v : fm.values.data()) v = n(rng);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = static_cast<int>(i % 3);
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_features = 3;
  const ForestModel m = TrainForest(fm, y, cfg);
  // A fully grown tree is pure on the bootstrap rows it saw.
  const std::size_t leaves = static_cast<std::size_t>(
      std::count_if(m.trees[0].nodes.begin(), m.trees[0].nodes.end(), [](const TreeNode& t) { return t.is_leaf(); }));
  EXPECT_GT(leaves, 1u);
}

class BlobForest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench_ = new testing::BlobBenchmark(testing::MakeBlobBenchmark());
    model_ = new ForestModel(TrainForest(bench_->train, bench_->train_labels, {}));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete bench_;
  }
  static testing::BlobBenchmark* bench_;
  static ForestModel* model_;
};
testing::BlobBenchmark* BlobForest::bench_ = nullptr;
ForestModel* BlobForest::model_ = nullptr;

TEST_F(BlobForest, ReachesBenchmarkAccuracy) {
  EXPECT_EQ(model_->trees.size(), 200u);
  EXPECT_GE(testing::AccuracyOf(PredictForest(*model_, bench_->test), bench_->test_labels), 0.93);
}

TEST_F(BlobForest, TreeOrderDoesNotMatter) {
  ForestModel shuffled = *model_;
  std::mt19937_64 rng(8);
  std::shuffle(shuffled.trees.begin(), shuffled.trees.end(), rng);
  EXPECT_EQ(PredictForest(shuffled, bench_->test), PredictForest(*model_, bench_->test));
}

TEST_F(BlobForest, VoteFractionsSumToOne) {
  const auto p = PredictProbaForest(*model_, bench_->test);
  const auto votes = ForestVotes(*model_, bench_->test);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (double v : p.row(i)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(PluralityVote(votes.row(i)), PredictForest(*model_, bench_->test)[i]);
  }
}

TEST_F(BlobForest, SeededAndThreadIndependent) {
  ForestConfig cfg;
  cfg.n_trees = 12;
  cfg.seed = 5;
  const ForestModel a = TrainForest(bench_->train, bench_->train_labels, cfg);
  EXPECT_EQ(TrainForest(bench_->train, bench_->train_labels, cfg), a);
  cfg.threads = 4;
  EXPECT_EQ(TrainForest(bench_->train, bench_->train_labels, cfg), a);
  cfg.seed = 6;
  cfg.threads = 1;
  EXPECT_NE(TrainForest(bench_->train, bench_->train_labels, cfg), a);
}

}  // namespace
}  // namespace skullfx::classifiers
