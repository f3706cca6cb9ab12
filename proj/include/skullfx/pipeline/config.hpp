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

// Pipeline configuration: a flat `section.key = value` text format. Every
// key can also be overridden on the command line as `--section.key value`.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skullfx/classifiers/forest.hpp"
#include "skullfx/classifiers/gbdt.hpp"
#include "skullfx/classifiers/linear_svc.hpp"
#include "skullfx/dataset.hpp"
#include "skullfx/error.hpp"
#include "skullfx/preprocess.hpp"

namespace skullfx::pipeline {

struct PipelineConfig {
  // paths
  std::string input_dir;
  std::string work_dir = "work";
  std::string labels;
  std::string allowlist;
  // ingest
  double thickness_mm = 1.0;
  // preprocess
  preprocess::PreprocessConfig preprocess;
  // split
  dataset::SplitFractions fractions;
  std::uint64_t split_seed = 0;
  // balance
  bool balance = true;
  std::uint64_t balance_seed = 0;
  // extractor
  std::string extractor = "toy";
  std::uint64_t extractor_seed = 0;
  std::size_t extractor_dim = 64;
  std::string sidecar;
  // classifier
  std::string classifier = "gbdt";
  classifiers::GbdtConfig gbdt;
  classifiers::ForestConfig forest;
  classifiers::SvcConfig svc;
  // run
  std::string run_name = "run";
  unsigned threads = 1;
  int report_digits = 2;
};

namespace detail {

inline std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    Fail(ErrorCode::kConfig, key + ": cannot parse '" + text + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) Fail(ErrorCode::kConfig, key + ": value must be finite");
  }
  return v;
}

inline bool ParseBool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  Fail(ErrorCode::kConfig, key + ": expected a boolean, got '" + text + "'");
}

inline std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

// The complete key table, in canonical order.
inline const std::vector<ConfigKey>& ConfigKeys() {
  using detail::FormatDouble;
  using detail::ParseBool;
  using detail::ParseNumber;
  using C = PipelineConfig;
  auto str = [](std::string C::*m) {
    return std::make_pair(
        std::function<void(C&, const std::string&)>([m](C& c, const std::string& v) { c.*m = v; }),
        std::function<std::string(const C&)>([m](const C& c) { return c.*m; }));
  };
  auto key = [](std::string name, std::string help, auto setget) {
    return ConfigKey{std::move(name), std::move(help), std::move(setget.first), std::move(setget.second)};
  };
  auto custom = [](std::string name, std::string help, std::function<void(C&, const std::string&)> set,
                   std::function<std::string(const C&)> get) {
    return ConfigKey{std::move(name), std::move(help), std::move(set), std::move(get)};
  };
  // Field accessors for numeric members.
#define SKULLFX_NUM(NAME, HELP, TYPE, EXPR)                                                     \
  custom(NAME, HELP, [](C& c, const std::string& v) { EXPR = ParseNumber<TYPE>(NAME, v); }, \
         [](const C& c) { return std::to_string(EXPR); })
#define SKULLFX_REAL(NAME, HELP, EXPR)                                                            \
  custom(NAME, HELP, [](C& c, const std::string& v) { EXPR = ParseNumber<double>(NAME, v); }, \
         [](const C& c) { return FormatDouble(EXPR); })
#define SKULLFX_BOOL(NAME, HELP, EXPR)                                                  \
  custom(NAME, HELP, [](C& c, const std::string& v) { EXPR = ParseBool(NAME, v); }, \
         [](const C& c) { return std::string((EXPR) ? "true" : "false"); })

  static const std::vector<ConfigKey> keys = {
      key("paths.input_dir", "directory scanned for DICOM files", str(&C::input_dir)),
      key("paths.work_dir", "manifest, tensor cache and run outputs", str(&C::work_dir)),
      key("paths.labels", "CSV patient_id,instance_number,class", str(&C::labels)),
      key("paths.allowlist", "optional list of files to ingest, relative to input_dir",
          str(&C::allowlist)),
      SKULLFX_REAL("ingest.thickness_mm", "slice thickness to keep", c.thickness_mm),
      SKULLFX_REAL("preprocess.threshold_hu", "tissue mask threshold", c.preprocess.threshold_hu),
      SKULLFX_NUM("preprocess.out_side", "output tensor side", std::size_t, c.preprocess.out_side),
      SKULLFX_BOOL("preprocess.tilt", "enable tilt correction", c.preprocess.tilt_enabled),
      SKULLFX_REAL("split.train", "training slice fraction", c.fractions.train),
      SKULLFX_REAL("split.val", "validation slice fraction", c.fractions.val),
      SKULLFX_REAL("split.test", "test slice fraction", c.fractions.test),
      SKULLFX_NUM("split.seed", "patient shuffle seed", std::uint64_t, c.split_seed),
      SKULLFX_BOOL("balance.enabled", "oversample the training partition", c.balance),
      SKULLFX_NUM("balance.seed", "oversampling seed", std::uint64_t, c.balance_seed),
      key("extractor.kind", "toy | interchange", str(&C::extractor)),
      SKULLFX_NUM("extractor.seed", "toy projection seed", std::uint64_t, c.extractor_seed),
      SKULLFX_NUM("extractor.dim", "toy feature dimension", std::size_t, c.extractor_dim),
      key("extractor.sidecar", "sidecar JSON of an exported model", str(&C::sidecar)),
      key("classifier.kind", "gbdt | forest | svc", str(&C::classifier)),
      SKULLFX_NUM("gbdt.n_estimators", "boosting rounds (or total trees)", int, c.gbdt.n_estimators),
      SKULLFX_BOOL("gbdt.total_trees", "n_estimators counts trees, not rounds",
                   c.gbdt.estimators_are_total_trees),
      SKULLFX_REAL("gbdt.learning_rate", "shrinkage", c.gbdt.learning_rate),
      SKULLFX_NUM("gbdt.max_depth", "tree depth limit", int, c.gbdt.max_depth),
      SKULLFX_REAL("gbdt.lambda", "L2 leaf regularization", c.gbdt.lambda),
      SKULLFX_REAL("gbdt.gamma", "split penalty", c.gbdt.gamma),
      SKULLFX_NUM("forest.n_trees", "number of trees", int, c.forest.n_trees),
      SKULLFX_NUM("forest.max_features", "candidates per node, 0 for sqrt(d)", int,
                  c.forest.max_features),
      SKULLFX_NUM("forest.seed", "bootstrap and feature seed", std::uint64_t, c.forest.seed),
      SKULLFX_REAL("svc.c", "inverse regularization strength", c.svc.C),
      SKULLFX_NUM("svc.epochs", "passes over the data", int, c.svc.epochs),
      SKULLFX_NUM("svc.seed", "epoch shuffle seed", std::uint64_t, c.svc.seed),
      key("run.name", "output directory name under work_dir/runs", str(&C::run_name)),
      SKULLFX_NUM("run.threads", "worker threads", unsigned, c.threads),
      SKULLFX_NUM("report.digits", "decimals in the text report", int, c.report_digits),
  };
#undef SKULLFX_NUM
#undef SKULLFX_REAL
#undef SKULLFX_BOOL
  return keys;
}

inline const ConfigKey& FindKey(const std::string& name) {
  for (const auto& k : ConfigKeys()) {
    if (k.name == name) return k;
  }
  Fail(ErrorCode::kConfig, "unknown key '" + name + "'");
}

inline void SetKey(PipelineConfig& cfg, const std::string& name, const std::string& value) {
  FindKey(name).set(cfg, value);
}

// Applies `section.key = value` lines to `cfg`. Blank lines and lines
// starting with '#' are ignored; repeating a key is an error.
inline void ApplyConfigText(PipelineConfig& cfg, const std::string& text,
                            const std::string& origin = "config") {
  std::set<std::string> seen;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const std::string line = detail::Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kConfig, where + ": expected key = value");
    const std::string name = detail::Trim(line.substr(0, eq));
    const std::string value = detail::Trim(line.substr(eq + 1));
    if (!seen.insert(name).second) Fail(ErrorCode::kConfig, where + ": '" + name + "' set twice");
    try {
      SetKey(cfg, name, value);
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, where + ": " + e.detail());
    }
  }
}

inline PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kConfig, "cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  PipelineConfig cfg;
  ApplyConfigText(cfg, text, path.filename().string());
  return cfg;
}

// Canonical text form; ApplyConfigText(FormatConfig(c)) reproduces c.
inline std::string FormatConfig(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& k : ConfigKeys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

inline nlohmann::ordered_json ConfigSnapshot(const PipelineConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : ConfigKeys()) j[k.name] = k.get(cfg);
  return j;
}

// Checks cross-field constraints before any work starts.
inline void ValidateConfig(const PipelineConfig& cfg) {
  auto bad = [](const std::string& msg) { Fail(ErrorCode::kConfig, msg); };
  const auto f = cfg.fractions.as_array();
  if (std::any_of(f.begin(), f.end(), [](double x) { return !(x > 0.0); })) {
    bad("split fractions must all be positive");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    bad("split fractions sum to " + detail::FormatDouble(f[0] + f[1] + f[2]) + ", expected 1");
  }
  if (!(cfg.thickness_mm > 0.0)) bad("ingest.thickness_mm must be positive");
  if (cfg.preprocess.out_side < 4) bad("preprocess.out_side must be at least 4");
  if (cfg.extractor != "toy" && cfg.extractor != "interchange") {
    bad("extractor.kind must be toy or interchange, got '" + cfg.extractor + "'");
  }
  if (cfg.extractor == "toy" && cfg.extractor_dim == 0) bad("extractor.dim must be positive");
  if (cfg.extractor == "interchange" && cfg.sidecar.empty()) {
    bad("extractor.sidecar is required for the interchange extractor");
  }
  if (cfg.classifier != "gbdt" && cfg.classifier != "forest" && cfg.classifier != "svc") {
    bad("classifier.kind must be gbdt, forest or svc, got '" + cfg.classifier + "'");
  }
  if (cfg.gbdt.n_estimators < 0) bad("gbdt.n_estimators must be >= 0");
  if (!(cfg.gbdt.learning_rate > 0.0)) bad("gbdt.learning_rate must be positive");
  if (cfg.gbdt.max_depth < 0) bad("gbdt.max_depth must be >= 0");
  if (cfg.gbdt.lambda < 0.0 || cfg.gbdt.gamma < 0.0) bad("gbdt.lambda and gbdt.gamma must be >= 0");
  if (cfg.forest.n_trees < 1) bad("forest.n_trees must be >= 1");
  if (cfg.forest.max_features < 0) bad("forest.max_features must be >= 0");
  if (!(cfg.svc.C > 0.0)) bad("svc.c must be positive");
  if (cfg.svc.epochs < 1) bad("svc.epochs must be >= 1");
  if (cfg.run_name.empty() || cfg.run_name.find_first_of("/\\") != std::string::npos ||
      cfg.run_name == "." || cfg.run_name == "..") {
    bad("run.name must be a plain directory name");
  }
  if (cfg.threads < 1) bad("run.threads must be >= 1");
  if (cfg.report_digits < 1 || cfg.report_digits > 8) bad("report.digits must be in [1, 8]");
}

}  // namespace skullfx::pipeline
