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

// Binary decision trees shared by the boosted and bagged ensembles, plus the
// exact greedy second-order split search used by boosting.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "skullfx/error.hpp"
#include "skullfx/features.hpp"

namespace skullfx::classifiers {

// Internal nodes route x[feature] < threshold to `left`. Leaves have
// feature == -1 and carry `value` (a leaf weight for regression trees, a
// class id for classification trees).
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes stored in creation order; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double Evaluate(const Row& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const TreeNode& n = nodes[i];
      i = static_cast<std::size_t>(
          static_cast<double>(x[static_cast<std::size_t>(n.feature)]) < n.threshold ? n.left
                                                                                   : n.right);
    }
    return nodes[i].value;
  }

  std::size_t Depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::size_t> depth(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, depth[i]);
      if (!nodes[i].is_leaf()) {
        depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
        depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
      }
    }
    return best;
  }

  bool operator==(const Tree&) const = default;
};

struct SplitCandidate {
  double threshold = 0.0;
  double gain = 0.0;
};

// Threshold strictly above `lo` and at most `hi` (lo < hi).
inline double Midpoint(double lo, double hi) {
  const double t = lo + (hi - lo) / 2.0;
  return t > lo ? t : hi;
}

inline double SplitGain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                (gl + gr) * (gl + gr) / (hl + hr + lambda)) -
         gamma;
}

// Scans rows in ascending feature order and returns the highest-gain
// threshold (first one wins on ties), or nothing when no threshold has
// positive gain.
template <typename Value>
std::optional<SplitCandidate> ScanSortedSplit(std::span<const std::uint32_t> order, Value&& x,
                                              std::span<const double> g,
                                              std::span<const double> h, double lambda,
                                              double gamma) {
  double gt = 0.0, ht = 0.0;
  for (std::uint32_t i : order) {
    gt += g[i];
    ht += h[i];
  }
  std::optional<SplitCandidate> best;
  double gl = 0.0, hl = 0.0;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    gl += g[order[j]];
    hl += h[order[j]];
    const double a = x(order[j]), b = x(order[j + 1]);
    if (!(a < b)) continue;
    const double gain = SplitGain(gl, hl, gt - gl, ht - hl, lambda, gamma);
    if (gain > 0.0 && (!best || gain > best->gain)) best = SplitCandidate{Midpoint(a, b), gain};
  }
  return best;
}

// Best second-order split of one feature column:
//   gain = 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
// over midpoints between consecutive distinct sorted values.
inline std::optional<SplitCandidate> BestSplit(std::span<const double> g,
                                               std::span<const double> h,
                                               std::span<const double> x, double lambda,
                                               double gamma) {
  if (g.size() != h.size() || g.size() != x.size()) {
    Fail(ErrorCode::kDimensionMismatch, "gradient, hessian and feature lengths differ");
  }
  std::vector<std::uint32_t> order(x.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
  return ScanSortedSplit(order, [&](std::uint32_t i) { return x[i]; }, g, h, lambda, gamma);
}

struct RegressionTreeParams {
  int max_depth = 6;
  double lambda = 1.0;
  double gamma = 0.0;
  double learning_rate = 0.1;
};

// Feature columns sorted once per training run and shared by every tree.
class SortedColumns {
 public:
  explicit SortedColumns(const features::FeatureMatrix& fm) : order_(fm.d()) {
    for (std::size_t f = 0; f < fm.d(); ++f) {
      auto& o = order_[f];
      o.resize(fm.n());
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
        return fm.values(a, f) < fm.values(b, f);
      });
    }
  }
  const std::vector<std::uint32_t>& operator[](std::size_t f) const { return order_[f]; }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

// Fits one regression tree to (g, h) by exact greedy search. Leaf weights
// are -G/(H+lambda) scaled by the learning rate. Across features the lowest
// index wins ties.
inline Tree FitRegressionTree(const features::FeatureMatrix& fm, const SortedColumns& sorted,
                              std::span<const double> g, std::span<const double> h,
                              const RegressionTreeParams& p) {
  const std::size_t d = fm.d();
  Tree tree;
  struct Pending {
    std::size_t node;
    int depth;
    std::vector<std::vector<std::uint32_t>> order;  // per feature, node rows sorted
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  {
    Pending root{0, 0, {}};
    root.order.reserve(d);
    for (std::size_t f = 0; f < d; ++f) root.order.push_back(sorted[f]);
    stack.push_back(std::move(root));
  }
  std::vector<std::uint8_t> goes_left(fm.n());

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    std::span<const std::uint32_t> rows;
    if (!cur.order.empty()) rows = cur.order[0];

    double gsum = 0.0, hsum = 0.0;
    for (std::uint32_t i : rows) {
      gsum += g[i];
      hsum += h[i];
    }
    auto make_leaf = [&] {
      tree.nodes[cur.node].feature = -1;
      tree.nodes[cur.node].value = -gsum / (hsum + p.lambda) * p.learning_rate;
    };
    if (cur.depth >= p.max_depth || rows.size() < 2 || d == 0) {
      make_leaf();
      continue;
    }

    std::optional<SplitCandidate> best;
    std::size_t best_feature = 0;
    for (std::size_t f = 0; f < d; ++f) {
      auto cand = ScanSortedSplit(
          cur.order[f], [&](std::uint32_t i) { return static_cast<double>(fm.values(i, f)); }, g,
          h, p.lambda, p.gamma);
      if (cand && (!best || cand->gain > best->gain)) {
        best = cand;
        best_feature = f;
      }
    }
    if (!best) {
      make_leaf();
      continue;
    }

    for (std::uint32_t i : rows) {
      goes_left[i] = static_cast<double>(fm.values(i, best_feature)) < best->threshold;
    }
    Pending left{tree.nodes.size(), cur.depth + 1, {}};
    Pending right{tree.nodes.size() + 1, cur.depth + 1, {}};
    left.order.resize(d);
    right.order.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      for (std::uint32_t i : cur.order[f]) (goes_left[i] ? left.order[f] : right.order[f]).push_back(i);
    }
    TreeNode& node = tree.nodes[cur.node];
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best->threshold;
    node.left = static_cast<std::int32_t>(left.node);
    node.right = static_cast<std::int32_t>(right.node);
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return tree;
}

inline int CountClasses(std::span<const int> labels, int declared) {
  int k = declared;
  for (int l : labels) {
    if (l < 0) Fail(ErrorCode::kLabelOutOfRange, std::to_string(l));
    if (declared > 0 && l >= declared) Fail(ErrorCode::kLabelOutOfRange, std::to_string(l));
    if (declared <= 0) k = std::max(k, l + 1);
  }
  return k;
}

inline void RequireTwoClasses(std::span<const int> labels) {
  if (labels.empty()) Fail(ErrorCode::kDegenerateLabels, "no training labels");
  for (int l : labels) {
    if (l != labels.front()) return;
  }
  Fail(ErrorCode::kDegenerateLabels, "training labels need at least two distinct classes");
}

}  // namespace skullfx::classifiers
