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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skullfx/error.hpp"
#include "skullfx/matrix.hpp"

namespace skullfx::dataset {

// Class names in code order (lexicographic).
inline std::vector<std::string> DefaultClassNames() {
  return {"Depressed Fracture", "Linear Fracture", "Not Fractured"};
}

struct LabeledSample {
  std::string patient_id;
  std::string sample_ref;
  int class_id = 0;

  bool operator==(const LabeledSample&) const = default;
};

struct LabeledDataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names = DefaultClassNames();

  std::size_t size() const { return samples.size(); }
  std::size_t num_classes() const { return class_names.size(); }

  std::vector<std::size_t> ClassCounts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const auto& s : samples) ++counts.at(static_cast<std::size_t>(s.class_id));
    return counts;
  }

  std::vector<std::string> PatientIds() const {
    std::set<std::string> ids;
    for (const auto& s : samples) ids.insert(s.patient_id);
    return {ids.begin(), ids.end()};
  }

  std::vector<int> Labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.class_id);
    return out;
  }
};

// N x K indicator matrix, one set bit per row.
struct OneHot {
  Matrix<std::uint8_t> rows;
};

namespace detail {

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back().push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(ch);
    }
  }
  return fields;
}

inline std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

// Integer code of every name, assigned by lexicographic order of the
// configured class list.
inline std::map<std::string, int> ClassCodes(std::vector<std::string> class_names) {
  std::sort(class_names.begin(), class_names.end());
  std::map<std::string, int> codes;
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    codes.emplace(class_names[i], static_cast<int>(i));
  }
  return codes;
}

inline std::pair<std::vector<int>, OneHot> EncodeLabels(
    const std::vector<std::string>& names,
    const std::vector<std::string>& class_names = DefaultClassNames()) {
  const auto codes = ClassCodes(class_names);
  std::vector<int> labels;
  labels.reserve(names.size());
  OneHot onehot{Matrix<std::uint8_t>(names.size(), codes.size(), 0)};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = codes.find(names[i]);
    if (it == codes.end()) Fail(ErrorCode::kUnknownClassName, names[i]);
    labels.push_back(it->second);
    onehot.rows(i, static_cast<std::size_t>(it->second)) = 1;
  }
  return {std::move(labels), std::move(onehot)};
}

inline std::vector<std::string> DecodeLabels(
    const std::vector<int>& labels,
    std::vector<std::string> class_names = DefaultClassNames()) {
  std::sort(class_names.begin(), class_names.end());
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= class_names.size()) {
      Fail(ErrorCode::kLabelOutOfRange, std::to_string(l));
    }
    out.push_back(class_names[static_cast<std::size_t>(l)]);
  }
  return out;
}

inline OneHot ToOneHot(const std::vector<int>& labels, std::size_t k) {
  OneHot out{Matrix<std::uint8_t>(labels.size(), k, 0)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      Fail(ErrorCode::kLabelOutOfRange, std::to_string(labels[i]));
    }
    out.rows(i, static_cast<std::size_t>(labels[i])) = 1;
  }
  return out;
}

// Reads `patient_id,sample_ref,class` rows. Row numbers in errors are
// 1-based file lines.
inline LabeledDataset LoadManifest(const std::filesystem::path& csv_path,
                                   const std::vector<std::string>& class_names =
                                       DefaultClassNames()) {
  std::ifstream in(csv_path);
  if (!in) Fail(ErrorCode::kIo, "cannot open manifest " + csv_path.string());
  const auto codes = ClassCodes(class_names);
  LabeledDataset ds;
  ds.class_names = class_names;
  std::sort(ds.class_names.begin(), ds.class_names.end());

  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> refs;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "patient_id,sample_ref,class") {
        Fail(ErrorCode::kMalformedRow, "row 1: expected header patient_id,sample_ref,class");
      }
      continue;
    }
    if (line.empty()) continue;
    auto fields = detail::SplitCsvLine(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      Fail(ErrorCode::kMalformedRow, "row " + std::to_string(lineno) + ": " + line);
    }
    auto code = codes.find(fields[2]);
    if (code == codes.end()) {
      Fail(ErrorCode::kUnknownClassName,
           "row " + std::to_string(lineno) + ": '" + fields[2] + "'");
    }
    if (!refs.insert(fields[1]).second) {
      Fail(ErrorCode::kDuplicateSampleRef,
           "row " + std::to_string(lineno) + ": " + fields[1]);
    }
    ds.samples.push_back({fields[0], fields[1], code->second});
  }
  if (lineno == 0) Fail(ErrorCode::kMalformedRow, "row 1: missing header");
  return ds;
}

inline void WriteManifest(const LabeledDataset& ds, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + csv_path.string());
  out << "patient_id,sample_ref,class\n";
  for (const auto& s : ds.samples) {
    out << detail::CsvField(s.patient_id) << ',' << detail::CsvField(s.sample_ref) << ','
        << detail::CsvField(ds.class_names.at(static_cast<std::size_t>(s.class_id))) << '\n';
  }
}

struct SplitFractions {
  double train = 0.5;
  double val = 0.2;
  double test = 0.3;

  std::array<double, 3> as_array() const { return {train, val, test}; }
};

struct Split {
  LabeledDataset train, val, test;
};

// Partitions patients, never slices. Patients are shuffled with the seeded
// generator and each is handed to the partition furthest below its slice
// target (ties go to the earlier partition).
inline Split GroupedSplit(const LabeledDataset& ds, const SplitFractions& fractions,
                          std::uint64_t seed) {
  const auto f = fractions.as_array();
  if (std::any_of(f.begin(), f.end(), [](double x) { return !(x > 0.0); }) ||
      std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    Fail(ErrorCode::kConfig, "split fractions must be positive and sum to 1");
  }
  std::map<std::string, std::size_t> slices_per_patient;
  for (const auto& s : ds.samples) ++slices_per_patient[s.patient_id];
  if (slices_per_patient.size() < 3) {
    Fail(ErrorCode::kTooFewPatients,
         std::to_string(slices_per_patient.size()) + " patients, need at least 3");
  }

  std::vector<std::string> patients;
  for (const auto& [id, n] : slices_per_patient) patients.push_back(id);
  std::mt19937_64 rng(seed);
  std::shuffle(patients.begin(), patients.end(), rng);

  const double total = static_cast<double>(ds.size());
  std::array<double, 3> assigned{0, 0, 0};
  std::map<std::string, int> partition_of;
  for (const auto& id : patients) {
    int best = 0;
    double best_deficit = f[0] * total - assigned[0];
    for (int p = 1; p < 3; ++p) {
      const double deficit = f[p] * total - assigned[p];
      if (deficit > best_deficit) {
        best = p;
        best_deficit = deficit;
      }
    }
    partition_of[id] = best;
    assigned[best] += static_cast<double>(slices_per_patient[id]);
  }

  Split out;
  std::array<LabeledDataset*, 3> parts{&out.train, &out.val, &out.test};
  for (auto* p : parts) p->class_names = ds.class_names;
  for (const auto& s : ds.samples) parts[partition_of[s.patient_id]]->samples.push_back(s);
  return out;
}

// Random oversampling: every class below `target` gains uniformly drawn
// duplicates of its own samples until it reaches `target`.
inline LabeledDataset Oversample(const LabeledDataset& ds, std::size_t target,
                                 std::mt19937_64& rng) {
  LabeledDataset out = ds;
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.samples[i].class_id)].push_back(i);
  }
  for (const auto& members : by_class) {
    if (members.empty() || members.size() >= target) continue;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t n = members.size(); n < target; ++n) {
      out.samples.push_back(ds.samples[members[pick(rng)]]);
    }
  }
  return out;
}

// Random undersampling: every class above `target` keeps a uniformly chosen
// subset of `target` samples, in original order.
inline LabeledDataset Undersample(const LabeledDataset& ds, std::size_t target,
                                  std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.samples[i].class_id)].push_back(i);
  }
  std::vector<bool> keep(ds.size(), true);
  for (auto& members : by_class) {
    if (members.size() <= target) continue;
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = target; j < members.size(); ++j) keep[members[j]] = false;
  }
  LabeledDataset out;
  out.class_names = ds.class_names;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (keep[i]) out.samples.push_back(ds.samples[i]);
  }
  return out;
}

// Oversample minorities up to the majority count, then undersample down to
// the smallest resulting class (a no-op after full oversampling), then
// shuffle. Sample references are duplicated, never synthesized.
inline LabeledDataset Rebalance(const LabeledDataset& ds, std::uint64_t seed) {
  const auto counts = ds.ClassCounts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) Fail(ErrorCode::kEmptyClass, "class " + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  const std::size_t majority = *std::max_element(counts.begin(), counts.end());
  LabeledDataset over = Oversample(ds, majority, rng);
  const auto over_counts = over.ClassCounts();
  LabeledDataset out =
      Undersample(over, *std::min_element(over_counts.begin(), over_counts.end()), rng);
  std::shuffle(out.samples.begin(), out.samples.end(), rng);
  return out;
}

inline nlohmann::json SplitSidecar(const Split& split, const SplitFractions& fractions,
                                   std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["fractions"] = {{"train", fractions.train}, {"val", fractions.val}, {"test", fractions.test}};
  auto part = [](const LabeledDataset& d) {
    return nlohmann::json{{"samples", d.size()},
                          {"patients", d.PatientIds().size()},
                          {"class_counts", d.ClassCounts()}};
  };
  j["train"] = part(split.train);
  j["val"] = part(split.val);
  j["test"] = part(split.test);
  return j;
}

}  // namespace skullfx::dataset
