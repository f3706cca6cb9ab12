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

// One-vs-rest linear SVC: K binary L2-regularized squared-hinge problems.
// The intercept is an appended constant-1 feature whose weight is
// regularized like every other weight.
//
// Each problem minimizes
//   lambda/2 |w|^2 + 1/n sum_i max(0, 1 - y_i w.x_i)^2,  lambda = 1/(C n)
// by stochastic subgradient steps of size 1/(lambda t), with iterates
// projected onto the ball |w| <= sqrt(2/lambda) that contains the optimum.
// The returned weights average the iterates of the second half of training.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "skullfx/classifiers/tree.hpp"
#include "skullfx/error.hpp"
#include "skullfx/features.hpp"

namespace skullfx::classifiers {

struct SvcConfig {
  double C = 1.0;
  int epochs = 50;
  std::uint64_t seed = 0;
  int num_classes = 0;  // 0: infer from labels
};

struct LinearSvcModel {
  int num_classes = 0;
  int num_features = 0;
  double C = 1.0;
  // K x (D + 1); the last column multiplies the constant intercept feature.
  Matrix<double> weights;

  bool operator==(const LinearSvcModel&) const = default;
};

inline LinearSvcModel TrainLinearSvc(const features::FeatureMatrix& fm, std::span<const int> labels,
                                     const SvcConfig& cfg = {}) {
  if (labels.size() != fm.n()) {
    Fail(ErrorCode::kDimensionMismatch, "label count differs from feature rows");
  }
  RequireTwoClasses(labels);
  for (float v : fm.values.data()) {
    if (!std::isfinite(v)) Fail(ErrorCode::kShapeMismatch, "non-finite feature value");
  }
  if (!(cfg.C > 0.0)) Fail(ErrorCode::kConfig, "C must be positive");

  const std::size_t n = fm.n(), d = fm.d(), dim = d + 1;
  LinearSvcModel model;
  model.num_classes = std::max(2, CountClasses(labels, cfg.num_classes));
  model.num_features = static_cast<int>(d);
  model.C = cfg.C;
  const auto kc = static_cast<std::size_t>(model.num_classes);
  model.weights = Matrix<double>(kc, dim, 0.0);

  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  const double radius = std::sqrt(2.0 / lambda);
  const std::size_t total_steps = static_cast<std::size_t>(std::max(1, cfg.epochs)) * n;
  const std::size_t average_from = total_steps / 2;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Matrix<double> w(kc, dim, 0.0);
  Matrix<double> avg(kc, dim, 0.0);
  std::size_t averaged = 0;
  std::size_t t = 0;

  for (int epoch = 0; epoch < std::max(1, cfg.epochs); ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::uint32_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto x = fm.values.row(i);
      for (std::size_t k = 0; k < kc; ++k) {
        auto wk = w.row(k);
        const double y = labels[i] == static_cast<int>(k) ? 1.0 : -1.0;
        double dot = wk[d];
        for (std::size_t j = 0; j < d; ++j) dot += wk[j] * static_cast<double>(x[j]);
        const double margin = y * dot;
        const double shrink = 1.0 - 1.0 / static_cast<double>(t);
        for (double& v : wk) v *= shrink;
        if (margin < 1.0) {
          const double step = eta * 2.0 * (1.0 - margin) * y;
          for (std::size_t j = 0; j < d; ++j) wk[j] += step * static_cast<double>(x[j]);
          wk[d] += step;
        }
        double norm2 = 0.0;
        for (double v : wk) norm2 += v * v;
        if (norm2 > radius * radius) {
          const double s = radius / std::sqrt(norm2);
          for (double& v : wk) v *= s;
        }
      }
      if (t > average_from) {
        ++averaged;
        for (std::size_t j = 0; j < w.size(); ++j) avg.data()[j] += w.data()[j];
      }
    }
  }
  for (std::size_t j = 0; j < avg.size(); ++j) {
    model.weights.data()[j] = avg.data()[j] / static_cast<double>(averaged);
  }
  return model;
}

// N x K decision values w_k . [x, 1].
inline Matrix<double> DecisionFunctionSvc(const LinearSvcModel& model,
                                          const features::FeatureMatrix& fm) {
  if (static_cast<int>(fm.d()) != model.num_features) {
    Fail(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(model.num_features) +
                                            " features, got " + std::to_string(fm.d()));
  }
  const std::size_t d = fm.d();
  Matrix<double> out(fm.n(), static_cast<std::size_t>(model.num_classes));
  for (std::size_t i = 0; i < fm.n(); ++i) {
    const auto x = fm.values.row(i);
    for (std::size_t k = 0; k < out.cols(); ++k) {
      const auto wk = model.weights.row(k);
      double dot = wk[d];
      for (std::size_t j = 0; j < d; ++j) dot += wk[j] * static_cast<double>(x[j]);
      out(i, k) = dot;
    }
  }
  return out;
}

// Argmax of the decision values; ties go to the smallest class id.
inline std::vector<int> PredictSvc(const LinearSvcModel& model, const features::FeatureMatrix& fm) {
  const auto dv = DecisionFunctionSvc(model, fm);
  std::vector<int> out(dv.rows());
  for (std::size_t i = 0; i < dv.rows(); ++i) {
    const auto row = dv.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace skullfx::classifiers
