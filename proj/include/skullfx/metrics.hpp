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

// Multiclass evaluation: confusion matrix, precision/recall/F1 with every
// averaging mode, and the auxiliary panel (Hamming score and loss, balanced
// accuracy, macro one-vs-rest ROC AUC, Cohen's kappa, log loss).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skullfx/error.hpp"
#include "skullfx/matrix.hpp"

namespace skullfx::metrics {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  Matrix<std::size_t> counts;

  std::size_t num_classes() const { return counts.rows(); }
  std::size_t total() const {
    return std::accumulate(counts.data().begin(), counts.data().end(), std::size_t{0});
  }
  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t k = 0; k < num_classes(); ++k) t += counts(k, k);
    return t;
  }
  std::size_t tp(std::size_t k) const { return counts(k, k); }
  std::size_t support(std::size_t k) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < num_classes(); ++j) s += counts(k, j);
    return s;
  }
  std::size_t predicted(std::size_t k) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < num_classes(); ++j) s += counts(j, k);
    return s;
  }
  std::size_t fp(std::size_t k) const { return predicted(k) - tp(k); }
  std::size_t fn(std::size_t k) const { return support(k) - tp(k); }
  std::size_t tn(std::size_t k) const { return total() - tp(k) - fp(k) - fn(k); }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix MakeConfusionMatrix(std::span<const int> y_true, std::span<const int> y_pred,
                                           std::size_t k) {
  if (y_true.size() != y_pred.size()) {
    Fail(ErrorCode::kDimensionMismatch, "y_true and y_pred lengths differ");
  }
  ConfusionMatrix cm{Matrix<std::size_t>(k, k, 0)};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k) {
      Fail(ErrorCode::kLabelOutOfRange,
           "sample " + std::to_string(i) + ": (" + std::to_string(t) + ", " + std::to_string(p) + ")");
    }
    ++cm.counts(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

inline void RequireNonEmpty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) Fail(ErrorCode::kEmptyMatrix, "no evaluated samples");
}

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

enum class Averaging { kMicro, kMacro, kWeighted, kSamples };

struct PrfResult {
  std::vector<Scores> per_class;
  // Number of 0/0 divisions that were resolved to 0.
  std::size_t zero_divisions = 0;
};

namespace detail {
inline double SafeDiv(double num, double den, std::size_t& zero_divisions) {
  if (den == 0.0) {
    ++zero_divisions;
    return 0.0;
  }
  return num / den;
}
inline double F1(double p, double r, std::size_t& zero_divisions) {
  // Harmonic mean of equal values is that value; skip the rounding.
  if (p == r && p > 0.0) return p;
  return SafeDiv(2.0 * p * r, p + r, zero_divisions);
}
}  // namespace detail

// One-vs-rest precision, recall and F1 for every class.
inline PrfResult PrecisionRecallF1(const ConfusionMatrix& cm) {
  RequireNonEmpty(cm);
  PrfResult out;
  for (std::size_t k = 0; k < cm.num_classes(); ++k) {
    Scores s;
    s.support = cm.support(k);
    const auto tp = static_cast<double>(cm.tp(k));
    s.precision = detail::SafeDiv(tp, tp + static_cast<double>(cm.fp(k)), out.zero_divisions);
    s.recall = detail::SafeDiv(tp, tp + static_cast<double>(cm.fn(k)), out.zero_divisions);
    s.f1 = detail::F1(s.precision, s.recall, out.zero_divisions);
    out.per_class.push_back(s);
  }
  return out;
}

inline Scores AverageScores(const ConfusionMatrix& cm, Averaging mode) {
  const PrfResult prf = PrecisionRecallF1(cm);
  std::size_t ignored = 0;
  Scores avg;
  avg.support = cm.total();
  const auto k_count = static_cast<double>(cm.num_classes());
  switch (mode) {
    case Averaging::kMicro: {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        tp += static_cast<double>(cm.tp(k));
        fp += static_cast<double>(cm.fp(k));
        fn += static_cast<double>(cm.fn(k));
      }
      avg.precision = detail::SafeDiv(tp, tp + fp, ignored);
      avg.recall = detail::SafeDiv(tp, tp + fn, ignored);
      avg.f1 = detail::F1(avg.precision, avg.recall, ignored);
      break;
    }
    case Averaging::kMacro:
      for (const auto& s : prf.per_class) {
        avg.precision += s.precision / k_count;
        avg.recall += s.recall / k_count;
        avg.f1 += s.f1 / k_count;
      }
      break;
    case Averaging::kWeighted: {
      const auto total = static_cast<double>(cm.total());
      for (const auto& s : prf.per_class) {
        const double w = static_cast<double>(s.support) / total;
        avg.precision += w * s.precision;
        avg.recall += w * s.recall;
        avg.f1 += w * s.f1;
      }
      break;
    }
    case Averaging::kSamples: {
      // Per-sample scores over single-label sets are 1 for a hit and 0 for a
      // miss, so every samples-averaged score equals the hit rate.
      const double hit = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
      avg.precision = avg.recall = avg.f1 = hit;
      break;
    }
  }
  return avg;
}

inline double Accuracy(const ConfusionMatrix& cm) {
  RequireNonEmpty(cm);
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

inline double BalancedAccuracy(const ConfusionMatrix& cm) {
  RequireNonEmpty(cm);
  double sum = 0.0;
  for (std::size_t k = 0; k < cm.num_classes(); ++k) {
    const std::size_t support = cm.support(k);
    if (support == 0) Fail(ErrorCode::kZeroSupportClass, "class " + std::to_string(k));
    sum += static_cast<double>(cm.tp(k)) / static_cast<double>(support);
  }
  return sum / static_cast<double>(cm.num_classes());
}

struct HammingResult {
  double score = 0.0;
  double loss = 0.0;
};

// loss: fraction of disagreeing label positions. score: mean per-sample
// Jaccard index of the positive-label sets.
inline HammingResult Hamming(const Matrix<std::uint8_t>& y_true, const Matrix<std::uint8_t>& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols()) {
    Fail(ErrorCode::kShapeMismatch, "indicator matrices differ in shape");
  }
  if (y_true.empty()) Fail(ErrorCode::kEmptyMatrix, "no samples");
  std::size_t disagree = 0;
  double jaccard = 0.0;
  for (std::size_t i = 0; i < y_true.rows(); ++i) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < y_true.cols(); ++k) {
      const bool t = y_true(i, k) != 0, p = y_pred(i, k) != 0;
      disagree += t != p;
      inter += t && p;
      uni += t || p;
    }
    jaccard += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return {jaccard / static_cast<double>(y_true.rows()),
          static_cast<double>(disagree) / static_cast<double>(y_true.size())};
}

// Mann-Whitney AUC of one score column: the fraction of (positive, negative)
// pairs ranked correctly, with ties credited 1/2. Computed from mid-ranks.
inline double BinaryRocAuc(std::span<const std::uint8_t> positive, std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t m = i; m < j; ++m) {
      if (positive[order[m]]) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) Fail(ErrorCode::kSingleClassColumn, "");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline std::vector<double> PerClassRocAuc(const Matrix<std::uint8_t>& y_true,
                                          const Matrix<double>& scores) {
  if (y_true.rows() != scores.rows() || y_true.cols() != scores.cols()) {
    Fail(ErrorCode::kShapeMismatch, "labels and scores differ in shape");
  }
  std::vector<double> out;
  std::vector<std::uint8_t> pos(y_true.rows());
  std::vector<double> col(y_true.rows());
  for (std::size_t k = 0; k < y_true.cols(); ++k) {
    for (std::size_t i = 0; i < y_true.rows(); ++i) {
      pos[i] = y_true(i, k);
      col[i] = scores(i, k);
    }
    try {
      out.push_back(BinaryRocAuc(pos, col));
    } catch (const Error&) {
      Fail(ErrorCode::kSingleClassColumn, "class " + std::to_string(k));
    }
  }
  return out;
}

// Unweighted mean of the one-vs-rest per-class AUCs.
inline double RocAuc(const Matrix<std::uint8_t>& y_true, const Matrix<double>& scores) {
  const auto per_class = PerClassRocAuc(y_true, scores);
  return std::accumulate(per_class.begin(), per_class.end(), 0.0) /
         static_cast<double>(per_class.size());
}

inline double CohenKappa(const ConfusionMatrix& cm) {
  RequireNonEmpty(cm);
  const auto total = static_cast<double>(cm.total());
  const double po = static_cast<double>(cm.trace()) / total;
  double pe = 0.0;
  for (std::size_t k = 0; k < cm.num_classes(); ++k) {
    pe += static_cast<double>(cm.support(k)) * static_cast<double>(cm.predicted(k));
  }
  pe /= total * total;
  if (pe == 1.0) Fail(ErrorCode::kDegenerateAgreement, "expected agreement is 1");
  return (po - pe) / (1.0 - pe);
}

inline constexpr double kLogLossEps = 1e-15;

// Mean negative log-likelihood of the true class after clipping every
// probability to [eps, 1 - eps] and renormalizing the row.
inline double LogLoss(std::span<const int> y_true, const Matrix<double>& prob,
                      double eps = kLogLossEps) {
  if (y_true.size() != prob.rows()) {
    Fail(ErrorCode::kDimensionMismatch, "label count differs from probability rows");
  }
  if (y_true.empty()) Fail(ErrorCode::kEmptyMatrix, "no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < prob.rows(); ++i) {
    const auto row = prob.row(i);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(std::abs(sum - 1.0) <= 1e-6)) {
      Fail(ErrorCode::kBadProbabilityRow, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    const int t = y_true[i];
    if (t < 0 || static_cast<std::size_t>(t) >= prob.cols()) {
      Fail(ErrorCode::kLabelOutOfRange, std::to_string(t));
    }
    double clipped_sum = 0.0;
    for (double p : row) clipped_sum += std::clamp(p, eps, 1.0 - eps);
    const double p_true = std::clamp(row[static_cast<std::size_t>(t)], eps, 1.0 - eps) / clipped_sum;
    total -= std::log(p_true);
  }
  return total / static_cast<double>(prob.rows());
}

// Per-class table, the four average rows and (optionally) the panel.
struct EvaluationReport {
  std::vector<std::string> class_names;
  ConfusionMatrix confusion;
  std::vector<Scores> per_class;
  Scores micro, macro, weighted, samples;
  std::size_t zero_divisions = 0;
  double accuracy = 0.0;
  std::optional<double> hamming_score, hamming_loss, balanced_accuracy, roc_auc, kappa, log_loss;
};

inline EvaluationReport ClassificationReport(const ConfusionMatrix& cm,
                                             const std::vector<std::string>& class_names) {
  RequireNonEmpty(cm);
  if (class_names.size() != cm.num_classes()) {
    Fail(ErrorCode::kDimensionMismatch, "class name count differs from matrix size");
  }
  EvaluationReport r;
  r.class_names = class_names;
  r.confusion = cm;
  const PrfResult prf = PrecisionRecallF1(cm);
  r.per_class = prf.per_class;
  r.zero_divisions = prf.zero_divisions;
  r.micro = AverageScores(cm, Averaging::kMicro);
  r.macro = AverageScores(cm, Averaging::kMacro);
  r.weighted = AverageScores(cm, Averaging::kWeighted);
  r.samples = AverageScores(cm, Averaging::kSamples);
  r.accuracy = Accuracy(cm);
  return r;
}

inline Matrix<std::uint8_t> IndicatorMatrix(std::span<const int> labels, std::size_t k) {
  Matrix<std::uint8_t> m(labels.size(), k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      Fail(ErrorCode::kLabelOutOfRange, std::to_string(labels[i]));
    }
    m(i, static_cast<std::size_t>(labels[i])) = 1;
  }
  return m;
}

// Full evaluation. `scores` ranks samples per class (for ROC AUC);
// `probabilities` must be row-stochastic (for log loss). Panel entries whose
// preconditions fail on this data (e.g. a class absent from the test set)
// are left empty.
inline EvaluationReport Evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                                 const Matrix<double>& scores, const Matrix<double>& probabilities,
                                 const std::vector<std::string>& class_names) {
  const std::size_t k = class_names.size();
  EvaluationReport r = ClassificationReport(MakeConfusionMatrix(y_true, y_pred, k), class_names);
  const auto t1 = IndicatorMatrix(y_true, k), p1 = IndicatorMatrix(y_pred, k);
  const HammingResult h = Hamming(t1, p1);
  r.hamming_score = h.score;
  r.hamming_loss = h.loss;
  auto attempt = [](auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  r.balanced_accuracy = attempt([&] { return BalancedAccuracy(r.confusion); });
  r.roc_auc = attempt([&] { return RocAuc(t1, scores); });
  r.kappa = attempt([&] { return CohenKappa(r.confusion); });
  r.log_loss = LogLoss(y_true, probabilities);
  return r;
}

namespace detail {
inline std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}
inline std::string PadLeft(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}
}  // namespace detail

// Plain-text table: one row per class, a blank line, then the micro, macro,
// weighted and samples average rows.
inline std::string FormatReport(const EvaluationReport& r, int digits = 2) {
  static const std::vector<std::string> kAvgNames = {"micro avg", "macro avg", "weighted avg",
                                                     "samples avg"};
  std::size_t name_width = 0;
  for (const auto& n : r.class_names) name_width = std::max(name_width, n.size());
  for (const auto& n : kAvgNames) name_width = std::max(name_width, n.size());
  const std::size_t col = std::max<std::size_t>(10, static_cast<std::size_t>(digits) + 8);

  std::ostringstream out;
  out << std::string(name_width, ' ');
  for (const char* h : {"precision", "recall", "f1-score", "support"}) out << detail::PadLeft(h, col);
  out << "\n\n";
  auto line = [&](const std::string& name, const Scores& s) {
    out << detail::PadLeft(name, name_width) << detail::PadLeft(detail::Fixed(s.precision, digits), col)
        << detail::PadLeft(detail::Fixed(s.recall, digits), col)
        << detail::PadLeft(detail::Fixed(s.f1, digits), col)
        << detail::PadLeft(std::to_string(s.support), col) << '\n';
  };
  for (std::size_t k = 0; k < r.per_class.size(); ++k) line(r.class_names[k], r.per_class[k]);
  out << '\n';
  line(kAvgNames[0], r.micro);
  line(kAvgNames[1], r.macro);
  line(kAvgNames[2], r.weighted);
  line(kAvgNames[3], r.samples);
  return out.str();
}

inline nlohmann::ordered_json ToJson(const Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
}

inline nlohmann::ordered_json ToJson(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) classes[r.class_names[k]] = ToJson(r.per_class[k]);
  j["per_class"] = classes;
  j["micro_avg"] = ToJson(r.micro);
  j["macro_avg"] = ToJson(r.macro);
  j["weighted_avg"] = ToJson(r.weighted);
  j["samples_avg"] = ToJson(r.samples);
  j["accuracy"] = r.accuracy;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["f1_micro"] = r.micro.f1;
  j["hamming_score"] = opt(r.hamming_score);
  j["hamming_loss"] = opt(r.hamming_loss);
  j["balanced_accuracy"] = opt(r.balanced_accuracy);
  j["roc_auc"] = opt(r.roc_auc);
  j["kappa"] = opt(r.kappa);
  j["log_loss"] = opt(r.log_loss);
  j["zero_divisions"] = r.zero_divisions;
  nlohmann::ordered_json cm = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.confusion.num_classes(); ++i) {
    const auto row = r.confusion.counts.row(i);
    cm.push_back(std::vector<std::size_t>(row.begin(), row.end()));
  }
  j["confusion_matrix"] = cm;
  return j;
}

// Inverse of ToJson for the fields the text report and panel need.
inline EvaluationReport ReportFromJson(const nlohmann::ordered_json& j) {
  auto scores = [](const nlohmann::ordered_json& s) {
    return Scores{s.at("precision").get<double>(), s.at("recall").get<double>(),
                  s.at("f1").get<double>(), s.at("support").get<std::size_t>()};
  };
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  try {
    EvaluationReport r;
    for (const auto& [name, s] : j.at("per_class").items()) {
      r.class_names.push_back(name);
      r.per_class.push_back(scores(s));
    }
    r.micro = scores(j.at("micro_avg"));
    r.macro = scores(j.at("macro_avg"));
    r.weighted = scores(j.at("weighted_avg"));
    r.samples = scores(j.at("samples_avg"));
    r.accuracy = j.at("accuracy").get<double>();
    r.zero_divisions = j.at("zero_divisions").get<std::size_t>();
    r.hamming_score = opt("hamming_score");
    r.hamming_loss = opt("hamming_loss");
    r.balanced_accuracy = opt("balanced_accuracy");
    r.roc_auc = opt("roc_auc");
    r.kappa = opt("kappa");
    r.log_loss = opt("log_loss");
    const auto& cm = j.at("confusion_matrix");
    const std::size_t k = r.class_names.size();
    if (cm.size() != k) Fail(ErrorCode::kDimensionMismatch, "confusion matrix size");
    r.confusion.counts = Matrix<std::size_t>(k, k);
    for (std::size_t a = 0; a < k; ++a) {
      if (cm[a].size() != k) Fail(ErrorCode::kDimensionMismatch, "confusion matrix row size");
      for (std::size_t b = 0; b < k; ++b) r.confusion.counts(a, b) = cm[a][b].get<std::size_t>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedValue, std::string("report JSON: ") + e.what());
  }
}

// The seven-metric panel, one "name value" line each; absent values print
// as n/a.
inline std::vector<std::pair<std::string, std::optional<double>>> PanelValues(
    const EvaluationReport& r) {
  return {{"f1_micro", r.micro.f1},           {"hamming_score", r.hamming_score},
          {"hamming_loss", r.hamming_loss},   {"balanced_accuracy", r.balanced_accuracy},
          {"roc_auc", r.roc_auc},             {"kappa", r.kappa},
          {"log_loss", r.log_loss}};
}

inline std::string FormatPanel(const EvaluationReport& r, int digits = 2) {
  std::ostringstream out;
  for (const auto& [name, v] : PanelValues(r)) {
    out << detail::PadLeft(name, 18) << "  " << (v ? detail::Fixed(*v, digits) : std::string("n/a"))
        << '\n';
  }
  return out.str();
}

}  // namespace skullfx::metrics
