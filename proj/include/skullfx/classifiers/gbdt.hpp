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

// Gradient-boosted trees with a softmax objective. Each round fits one
// regression tree per class to the first and second derivatives of the
// multinomial log loss at the current margins.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <span>
#include <vector>

#include "skullfx/classifiers/tree.hpp"
#include "skullfx/error.hpp"
#include "skullfx/features.hpp"

namespace skullfx::classifiers {

struct GbdtConfig {
  // Boosting rounds. With `estimators_are_total_trees` the count is read as
  // the total number of trees and divided by the class count instead.
  int n_estimators = 500;
  bool estimators_are_total_trees = false;
  double learning_rate = 0.1;
  int max_depth = 6;
  double lambda = 1.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;  // no randomness today; kept for config symmetry
  int num_classes = 0;     // 0: infer from labels
  unsigned threads = 1;
};

struct GbdtModel {
  int num_classes = 0;
  int num_features = 0;
  int rounds = 0;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  double base_score = 0.0;
  // Round-major: trees[r * num_classes + k].
  std::vector<Tree> trees;
  // Mean training log loss after each round.
  std::vector<double> train_loss;

  bool operator==(const GbdtModel&) const = default;
};

inline void SoftmaxInPlace(std::span<double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

inline void CheckFeatures(const features::FeatureMatrix& fm, int expected_d) {
  if (static_cast<int>(fm.d()) != expected_d) {
    Fail(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(expected_d) +
                                            " features, got " + std::to_string(fm.d()));
  }
}

// Margins after the first `rounds` rounds (all rounds when negative).
inline Matrix<double> PredictMarginsGbdt(const GbdtModel& model, const features::FeatureMatrix& fm,
                                         int rounds = -1) {
  CheckFeatures(fm, model.num_features);
  const int use = rounds < 0 ? model.rounds : std::min(rounds, model.rounds);
  const auto k_count = static_cast<std::size_t>(model.num_classes);
  Matrix<double> margins(fm.n(), k_count, model.base_score);
  for (std::size_t i = 0; i < fm.n(); ++i) {
    const auto x = fm.values.row(i);
    for (int r = 0; r < use; ++r) {
      for (std::size_t k = 0; k < k_count; ++k) {
        margins(i, k) += model.trees[static_cast<std::size_t>(r) * k_count + k].Evaluate(x);
      }
    }
  }
  return margins;
}

inline Matrix<double> PredictProbaGbdt(const GbdtModel& model, const features::FeatureMatrix& fm) {
  Matrix<double> p = PredictMarginsGbdt(model, fm);
  for (std::size_t i = 0; i < p.rows(); ++i) SoftmaxInPlace(p.row(i));
  return p;
}

inline std::vector<int> ArgmaxRows(const Matrix<double>& m) {
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

inline std::vector<int> PredictGbdt(const GbdtModel& model, const features::FeatureMatrix& fm) {
  return ArgmaxRows(PredictMarginsGbdt(model, fm));
}

inline GbdtModel TrainGbdt(const features::FeatureMatrix& fm, std::span<const int> labels,
                           const GbdtConfig& cfg = {}) {
  if (labels.size() != fm.n()) {
    Fail(ErrorCode::kDimensionMismatch, "label count differs from feature rows");
  }
  RequireTwoClasses(labels);
  const int k_count = std::max(2, CountClasses(labels, cfg.num_classes));
  if (fm.n() < static_cast<std::size_t>(k_count)) {
    Fail(ErrorCode::kDegenerateLabels, "fewer samples than classes");
  }
  if (fm.d() == 0) Fail(ErrorCode::kDimensionMismatch, "no features");
  for (float v : fm.values.data()) {
    if (!std::isfinite(v)) Fail(ErrorCode::kShapeMismatch, "non-finite feature value");
  }

  GbdtModel model;
  model.num_classes = k_count;
  model.num_features = static_cast<int>(fm.d());
  model.rounds = cfg.estimators_are_total_trees ? cfg.n_estimators / k_count : cfg.n_estimators;
  model.learning_rate = cfg.learning_rate;
  model.lambda = cfg.lambda;
  model.gamma = cfg.gamma;
  model.trees.reserve(static_cast<std::size_t>(model.rounds * k_count));
  model.train_loss.reserve(static_cast<std::size_t>(model.rounds));

  const RegressionTreeParams params{cfg.max_depth, cfg.lambda, cfg.gamma, cfg.learning_rate};
  const SortedColumns sorted(fm);
  const std::size_t n = fm.n();
  const auto kc = static_cast<std::size_t>(k_count);
  Matrix<double> margins(n, kc, model.base_score);
  Matrix<double> prob(n, kc);
  std::vector<std::vector<double>> grad(kc, std::vector<double>(n)), hess = grad;

  for (int r = 0; r < model.rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      auto p = prob.row(i);
      std::copy(margins.row(i).begin(), margins.row(i).end(), p.begin());
      SoftmaxInPlace(p);
      for (std::size_t k = 0; k < kc; ++k) {
        const double y = labels[i] == static_cast<int>(k) ? 1.0 : 0.0;
        grad[k][i] = p[k] - y;
        hess[k][i] = p[k] * (1.0 - p[k]);
      }
    }
    std::vector<Tree> round(kc);
    auto fit = [&](std::size_t k) {
      round[k] = FitRegressionTree(fm, sorted, grad[k], hess[k], params);
    };
    if (cfg.threads > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t k = 0; k < kc; ++k) jobs.push_back(std::async(std::launch::async, fit, k));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t k = 0; k < kc; ++k) fit(k);
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = fm.values.row(i);
      for (std::size_t k = 0; k < kc; ++k) margins(i, k) += round[k].Evaluate(x);
      auto p = prob.row(i);
      std::copy(margins.row(i).begin(), margins.row(i).end(), p.begin());
      SoftmaxInPlace(p);
      loss -= std::log(std::max(p[static_cast<std::size_t>(labels[i])], 1e-15));
    }
    model.train_loss.push_back(loss / static_cast<double>(n));
    for (auto& t : round) model.trees.push_back(std::move(t));
  }
  return model;
}

}  // namespace skullfx::classifiers
