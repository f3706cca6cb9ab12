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

// Random forest: fully grown Gini trees on seeded bootstraps, combined by
// plurality vote.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "skullfx/classifiers/tree.hpp"
#include "skullfx/error.hpp"
#include "skullfx/features.hpp"

namespace skullfx::classifiers {

struct ForestConfig {
  int n_trees = 200;
  int max_features = 0;  // 0: floor(sqrt(d)), at least 1
  std::uint64_t seed = 0;
  int num_classes = 0;  // 0: infer from labels
  unsigned threads = 1;
};

struct ForestModel {
  int num_classes = 0;
  int num_features = 0;
  int max_features = 0;
  // Leaf values are class ids.
  std::vector<Tree> trees;

  bool operator==(const ForestModel&) const = default;
};

namespace detail {

inline int ArgmaxSmallestId(std::span<const std::size_t> counts) {
  int best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

// Each tree draws from its own generator so trees can be grown in any order.
inline std::mt19937_64 TreeRng(std::uint64_t seed, std::size_t tree_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tree_index),
                    static_cast<std::uint32_t>(tree_index >> 32)};
  return std::mt19937_64(seq);
}

inline Tree GrowGiniTree(const features::FeatureMatrix& fm, std::span<const int> labels,
                         std::span<const std::uint32_t> sample, std::size_t k_count,
                         std::size_t max_features, std::mt19937_64& rng) {
  const std::size_t d = fm.d();
  Tree tree;
  tree.nodes.emplace_back();
  struct Pending {
    std::size_t node;
    std::vector<std::uint32_t> rows;
  };
  std::vector<Pending> stack;
  stack.push_back({0, {sample.begin(), sample.end()}});
  std::vector<std::uint32_t> features(d);
  std::iota(features.begin(), features.end(), 0u);
  std::vector<std::size_t> total(k_count), left(k_count);
  std::vector<std::uint32_t> sorted;

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    std::fill(total.begin(), total.end(), 0);
    for (std::uint32_t i : cur.rows) ++total[static_cast<std::size_t>(labels[i])];
    const int majority = ArgmaxSmallestId(total);
    const bool pure = total[static_cast<std::size_t>(majority)] == cur.rows.size();
    if (pure || cur.rows.size() < 2) {
      tree.nodes[cur.node].value = majority;
      continue;
    }

    // Features are visited in random order until `max_features` non-constant
    // ones have been evaluated.
    bool found = false;
    double best_score = -1.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t j = 0; j < d && evaluated < max_features; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, d - 1);
      std::swap(features[j], features[pick(rng)]);
      const std::size_t f = features[j];
      sorted = cur.rows;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
        return fm.values(a, f) < fm.values(b, f);
      });
      if (!(fm.values(sorted.front(), f) < fm.values(sorted.back(), f))) continue;
      ++evaluated;
      std::fill(left.begin(), left.end(), 0);
      const auto n = static_cast<double>(sorted.size());
      for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
        ++left[static_cast<std::size_t>(labels[sorted[s]])];
        const double a = fm.values(sorted[s], f), b = fm.values(sorted[s + 1], f);
        if (!(a < b)) continue;
        // Minimizing the weighted child Gini impurity is equivalent to
        // maximizing sum_k nL_k^2 / nL + sum_k nR_k^2 / nR.
        const auto nl = static_cast<double>(s + 1), nr = n - nl;
        double sl = 0.0, sr = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          const auto l = static_cast<double>(left[k]);
          const auto r = static_cast<double>(total[k] - left[k]);
          sl += l * l;
          sr += r * r;
        }
        const double score = sl / nl + sr / nr;
        if (score > best_score) {
          found = true;
          best_score = score;
          best_feature = f;
          best_threshold = Midpoint(a, b);
        }
      }
    }
    if (!found) {
      tree.nodes[cur.node].value = majority;
      continue;
    }

    Pending l{tree.nodes.size(), {}}, r{tree.nodes.size() + 1, {}};
    for (std::uint32_t i : cur.rows) {
      (static_cast<double>(fm.values(i, best_feature)) < best_threshold ? l.rows : r.rows)
          .push_back(i);
    }
    TreeNode& node = tree.nodes[cur.node];
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    node.left = static_cast<std::int32_t>(l.node);
    node.right = static_cast<std::int32_t>(r.node);
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back(std::move(r));
    stack.push_back(std::move(l));
  }
  return tree;
}

}  // namespace detail

inline ForestModel TrainForest(const features::FeatureMatrix& fm, std::span<const int> labels,
                               const ForestConfig& cfg = {}) {
  if (labels.size() != fm.n()) {
    Fail(ErrorCode::kDimensionMismatch, "label count differs from feature rows");
  }
  if (fm.n() < 2) Fail(ErrorCode::kDegenerateLabels, "need at least two samples");
  RequireTwoClasses(labels);
  if (fm.d() == 0) Fail(ErrorCode::kDimensionMismatch, "no features");

  ForestModel model;
  model.num_classes = std::max(2, CountClasses(labels, cfg.num_classes));
  model.num_features = static_cast<int>(fm.d());
  model.max_features =
      cfg.max_features > 0
          ? std::min(cfg.max_features, model.num_features)
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(fm.d())))));
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  const std::size_t n = fm.n();
  auto grow = [&](std::size_t t) {
    auto rng = detail::TreeRng(cfg.seed, t);
    std::uniform_int_distribution<std::uint32_t> draw(0, static_cast<std::uint32_t>(n - 1));
    std::vector<std::uint32_t> bootstrap(n);
    for (auto& b : bootstrap) b = draw(rng);
    model.trees[t] = detail::GrowGiniTree(fm, labels, bootstrap,
                                          static_cast<std::size_t>(model.num_classes),
                                          static_cast<std::size_t>(model.max_features), rng);
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) grow(t);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t t = w; t < model.trees.size(); t += threads) grow(t);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return model;
}

// Per-row vote counts, N x K.
inline Matrix<std::size_t> ForestVotes(const ForestModel& model, const features::FeatureMatrix& fm) {
  if (static_cast<int>(fm.d()) != model.num_features) {
    Fail(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(model.num_features) +
                                            " features, got " + std::to_string(fm.d()));
  }
  Matrix<std::size_t> votes(fm.n(), static_cast<std::size_t>(model.num_classes), 0);
  for (std::size_t i = 0; i < fm.n(); ++i) {
    const auto x = fm.values.row(i);
    for (const auto& tree : model.trees) {
      ++votes(i, static_cast<std::size_t>(tree.Evaluate(x)));
    }
  }
  return votes;
}

// Plurality of `votes`; ties go to the smallest class id.
inline int PluralityVote(std::span<const std::size_t> votes) {
  return detail::ArgmaxSmallestId(votes);
}

inline std::vector<int> PredictForest(const ForestModel& model, const features::FeatureMatrix& fm) {
  const auto votes = ForestVotes(model, fm);
  std::vector<int> out(fm.n());
  for (std::size_t i = 0; i < fm.n(); ++i) out[i] = PluralityVote(votes.row(i));
  return out;
}

// Vote fractions, usable as class scores.
inline Matrix<double> PredictProbaForest(const ForestModel& model,
                                         const features::FeatureMatrix& fm) {
  const auto votes = ForestVotes(model, fm);
  Matrix<double> out(votes.rows(), votes.cols());
  const auto n_trees = static_cast<double>(std::max<std::size_t>(1, model.trees.size()));
  for (std::size_t i = 0; i < votes.size(); ++i) {
    out.data()[i] = static_cast<double>(votes.data()[i]) / n_trees;
  }
  return out;
}

}  // namespace skullfx::classifiers
