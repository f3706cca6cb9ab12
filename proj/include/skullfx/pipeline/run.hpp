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

// Pipeline commands: synth, ingest, run, compare and report. Each command
// takes a validated configuration and writes its outputs under work_dir.
#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skullfx/classifiers/forest.hpp"
#include "skullfx/classifiers/gbdt.hpp"
#include "skullfx/classifiers/linear_svc.hpp"
#include "skullfx/classifiers/model_io.hpp"
#include "skullfx/dataset.hpp"
#include "skullfx/dicom.hpp"
#include "skullfx/error.hpp"
#include "skullfx/features.hpp"
#include "skullfx/metrics.hpp"
#include "skullfx/pipeline/cache.hpp"
#include "skullfx/pipeline/config.hpp"
#include "skullfx/pipeline/svg.hpp"
#include "skullfx/preprocess.hpp"
#include "skullfx/synthetic.hpp"

namespace skullfx::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Logger = std::function<void(const std::string&)>;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

inline void WriteText(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path, text);
}

inline Json ReadJson(const fs::path& path) {
  try {
    return Json::parse(ReadText(path));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedValue, path.string() + ": " + e.what());
  }
}

inline void WriteJson(const fs::path& path, const Json& j) { WriteText(path, j.dump(2) + "\n"); }

inline Json CountsJson(const dataset::LabeledDataset& ds) {
  Json j = Json::object();
  const auto counts = ds.ClassCounts();
  for (std::size_t k = 0; k < counts.size(); ++k) j[ds.class_names[k]] = counts[k];
  return j;
}

// Order-independent fingerprint of a partition's (patient, ref, class) rows.
inline std::string PartitionHash(const dataset::LabeledDataset& ds) {
  std::vector<std::string> rows;
  for (const auto& s : ds.samples) {
    rows.push_back(s.patient_id + "," + s.sample_ref + "," + std::to_string(s.class_id));
  }
  std::sort(rows.begin(), rows.end());
  Fnv1a64 h;
  for (const auto& r : rows) h.Update(r + "\n");
  return Hex64(h.value());
}

// Runs `fn` as a named stage: records wall time and prefixes errors with the
// stage name, keeping the original code.
template <typename Fn>
void Stage(const std::string& name, Json& timings, const Logger& log, Fn&& fn) {
  if (log) log("[" + name + "]");
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + ": " + e.detail());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
  timings[name] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  synthetic::SeriesConfig series;
  // Files with odd instance numbers use implicit VR, even ones explicit VR.
  bool mixed_syntax = true;
};

// Writes <out>/dicom/<patient>/<patient>_<instance>.dcm and <out>/labels.csv.
inline std::size_t CmdSynth(const fs::path& out_dir, const SynthOptions& opt) {
  const auto names = dataset::DefaultClassNames();
  const auto slices = synthetic::MakeSeries(opt.series);
  std::ostringstream labels;
  labels << "patient_id,instance_number,class\n";
  for (const auto& ls : slices) {
    const auto& s = ls.slice;
    const fs::path dir = out_dir / "dicom" / s.patient_id;
    fs::create_directories(dir);
    char file[64];
    std::snprintf(file, sizeof(file), "%s_%04d.dcm", s.patient_id.c_str(), s.instance_number);
    const auto syntax = opt.mixed_syntax && s.instance_number % 2 == 1
                            ? dicom::TransferSyntax::kImplicitVrLittleEndian
                            : dicom::TransferSyntax::kExplicitVrLittleEndian;
    const auto bytes = dicom::WriteDicom(dicom::SliceToElements(s), syntax);
    WriteFileAtomic(dir / file, std::string(bytes.begin(), bytes.end()));
    labels << s.patient_id << ',' << s.instance_number << ','
           << dataset::detail::CsvField(names.at(static_cast<std::size_t>(ls.class_id))) << '\n';
  }
  WriteFileAtomic(out_dir / "labels.csv", labels.str());
  return slices.size();
}

// ---------------------------------------------------------------------------
// ingest

// (patient id, instance number) -> class id, from a CSV with header
// patient_id,instance_number,class.
inline std::map<std::pair<std::string, int>, int> LoadSliceLabels(
    const fs::path& path, const std::vector<std::string>& class_names) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open labels " + path.string());
  const auto codes = dataset::ClassCodes(class_names);
  std::map<std::pair<std::string, int>, int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path.filename().string() + " row " + std::to_string(lineno);
    if (lineno == 1) {
      if (line != "patient_id,instance_number,class") {
        Fail(ErrorCode::kMalformedRow, where + ": expected header patient_id,instance_number,class");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = dataset::detail::SplitCsvLine(line);
    if (f.size() != 3 || f[0].empty()) Fail(ErrorCode::kMalformedRow, where + ": " + line);
    int instance = 0;
    const auto res = std::from_chars(f[1].data(), f[1].data() + f[1].size(), instance);
    if (res.ec != std::errc() || res.ptr != f[1].data() + f[1].size()) {
      Fail(ErrorCode::kMalformedRow, where + ": bad instance number '" + f[1] + "'");
    }
    const auto code = codes.find(f[2]);
    if (code == codes.end()) Fail(ErrorCode::kUnknownClassName, where + ": '" + f[2] + "'");
    if (!out.emplace(std::make_pair(f[0], instance), code->second).second) {
      Fail(ErrorCode::kDuplicateSampleRef, where + ": " + f[0] + " #" + f[1] + " labeled twice");
    }
  }
  return out;
}

struct IngestSummary {
  std::size_t slices = 0;     // slices of the requested thickness
  std::size_t processed = 0;  // newly preprocessed
  std::size_t cached = 0;     // already in the cache
  std::size_t unlabeled = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> patients;
};

inline IngestSummary CmdIngest(const PipelineConfig& cfg, const Logger& log = {}) {
  ValidateConfig(cfg);
  if (cfg.input_dir.empty()) Fail(ErrorCode::kConfig, "paths.input_dir is required for ingest");
  if (cfg.labels.empty()) Fail(ErrorCode::kConfig, "paths.labels is required for ingest");
  const fs::path work = cfg.work_dir;
  fs::create_directories(work / "cache");

  const auto class_names = dataset::DefaultClassNames();
  const auto labels = LoadSliceLabels(cfg.labels, class_names);
  std::optional<fs::path> allowlist;
  if (!cfg.allowlist.empty()) allowlist = cfg.allowlist;
  auto scan = dicom::ScanSeries(cfg.input_dir, cfg.thickness_mm, allowlist);

  IngestSummary sum;
  sum.slices = scan.slices.size();
  sum.warnings = std::move(scan.warnings);

  struct Job {
    const dicom::CtSlice* slice;
    fs::path out;
    std::vector<std::string> warnings;
  };
  std::vector<Job> jobs;
  dataset::LabeledDataset ds;
  ds.class_names = class_names;
  std::set<std::string> refs, patients;
  for (const auto& slice : scan.slices) {
    const auto label = labels.find({slice.patient_id, slice.instance_number});
    if (label == labels.end()) {
      ++sum.unlabeled;
      sum.warnings.push_back(slice.source_path + ": no label for " + slice.patient_id + " #" +
                             std::to_string(slice.instance_number) + ", skipped");
      continue;
    }
    const auto bytes = dicom::ReadFileBytes(fs::path(cfg.input_dir) / slice.source_path);
    const std::string ref = "cache/" + CacheKey(bytes, cfg.preprocess) + ".tns";
    if (!refs.insert(ref).second) {
      ++sum.duplicates;
      sum.warnings.push_back(slice.source_path + ": identical content to an earlier file, skipped");
      continue;
    }
    ds.samples.push_back({slice.patient_id, ref, label->second});
    patients.insert(slice.patient_id);
    if (fs::exists(work / ref)) {
      ++sum.cached;
    } else {
      jobs.push_back({&slice, work / ref, {}});
    }
  }
  if (ds.samples.empty()) Fail(ErrorCode::kEmptySeries, "no labeled slices under " + cfg.input_dir);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SaveTensor(preprocess::PreprocessSlice(*jobs[i].slice, cfg.preprocess, &jobs[i].warnings),
                 jobs[i].out);
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (threads <= 1) {
    run(0, jobs.size());
  } else {
    std::vector<std::future<void>> futures;
    const std::size_t chunk = (jobs.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < jobs.size(); b += chunk) {
      futures.push_back(std::async(std::launch::async, run, b, std::min(jobs.size(), b + chunk)));
    }
    for (auto& f : futures) f.get();
  }
  for (auto& j : jobs) {
    sum.warnings.insert(sum.warnings.end(), j.warnings.begin(), j.warnings.end());
  }
  sum.processed = jobs.size();
  sum.patients.assign(patients.begin(), patients.end());

  dataset::WriteManifest(ds, work / "manifest.csv");
  Json rec;
  rec["schema_version"] = kSchemaVersion;
  rec["config"] = ConfigSnapshot(cfg);
  rec["manifest"] = "manifest.csv";
  rec["slices"] = sum.slices;
  rec["labeled"] = ds.size();
  rec["processed"] = sum.processed;
  rec["cached"] = sum.cached;
  rec["unlabeled"] = sum.unlabeled;
  rec["duplicates"] = sum.duplicates;
  rec["patients"] = sum.patients;
  rec["class_counts"] = detail::CountsJson(ds);
  rec["warnings"] = sum.warnings;
  detail::WriteJson(work / "ingest_record.json", rec);
  if (log) {
    log("ingest: " + std::to_string(ds.size()) + " slices from " + std::to_string(patients.size()) +
        " patients, " + std::to_string(sum.processed) + " processed, " + std::to_string(sum.cached) +
        " cached");
    for (const auto& w : sum.warnings) log("warning: " + w);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// run

struct Predictions {
  std::vector<int> labels;
  Matrix<double> scores;         // ranks samples per class
  Matrix<double> probabilities;  // row-stochastic
};

inline Predictions Predict(const classifiers::AnyModel& model, const features::FeatureMatrix& fm) {
  Predictions p;
  if (const auto* g = std::get_if<classifiers::GbdtModel>(&model)) {
    p.probabilities = classifiers::PredictProbaGbdt(*g, fm);
    p.scores = p.probabilities;
    p.labels = classifiers::ArgmaxRows(p.probabilities);
  } else if (const auto* f = std::get_if<classifiers::ForestModel>(&model)) {
    p.probabilities = classifiers::PredictProbaForest(*f, fm);
    p.scores = p.probabilities;
    p.labels = classifiers::PredictForest(*f, fm);
  } else {
    const auto& s = std::get<classifiers::LinearSvcModel>(model);
    p.scores = classifiers::DecisionFunctionSvc(s, fm);
    p.labels = classifiers::PredictSvc(s, fm);
    // No calibrated probabilities: the predicted class gets all the mass.
    p.probabilities = Matrix<double>(fm.n(), p.scores.cols(), 0.0);
    for (std::size_t i = 0; i < fm.n(); ++i) {
      p.probabilities(i, static_cast<std::size_t>(p.labels[i])) = 1.0;
    }
  }
  return p;
}

inline features::FeatureExtractor MakeExtractor(const PipelineConfig& cfg) {
  if (cfg.extractor == "toy") {
    return features::ToyExtractor(cfg.extractor_seed, cfg.extractor_dim, cfg.preprocess.out_side);
  }
  auto ex = features::InterchangeExtractor(features::LoadSidecar(cfg.sidecar));
  if (ex.input_side() != cfg.preprocess.out_side) {
    Fail(ErrorCode::kShapeMismatch, "extractor expects side " + std::to_string(ex.input_side()) +
                                        ", preprocess.out_side is " +
                                        std::to_string(cfg.preprocess.out_side));
  }
  return ex;
}

struct RunResult {
  fs::path run_dir;
  Json record;
  metrics::EvaluationReport test_report;
};

inline std::string RenderReportText(const metrics::EvaluationReport& r, int digits) {
  return metrics::FormatReport(r, digits) + "\n" + metrics::FormatPanel(r, digits);
}

inline RunResult CmdRun(const PipelineConfig& cfg, const Logger& log = {}) {
  ValidateConfig(cfg);
  const fs::path work = cfg.work_dir;
  const fs::path run_dir = work / "runs" / cfg.run_name;
  Json timings = Json::object();
  Json artifacts = Json::object();
  auto artifact = [&](const std::string& key, const std::string& rel) {
    artifacts[key] = rel;
    return run_dir / rel;
  };

  dataset::LabeledDataset all;
  dataset::Split split;
  dataset::LabeledDataset train;
  features::FeatureMatrix f_train, f_val, f_test;
  std::size_t feature_dim = 0;
  std::string extractor_name;
  classifiers::AnyModel model;
  metrics::EvaluationReport test_report;
  std::optional<metrics::EvaluationReport> val_report;

  detail::Stage("load", timings, log, [&] {
    all = dataset::LoadManifest(work / "manifest.csv");
    fs::create_directories(run_dir);
  });

  detail::Stage("split", timings, log, [&] {
    split = dataset::GroupedSplit(all, cfg.fractions, cfg.split_seed);
    if (split.train.size() == 0 || split.test.size() == 0) {
      Fail(ErrorCode::kTooFewPatients, "empty train or test partition");
    }
    dataset::WriteManifest(split.train, artifact("split_train", "split_train.csv"));
    dataset::WriteManifest(split.val, artifact("split_val", "split_val.csv"));
    dataset::WriteManifest(split.test, artifact("split_test", "split_test.csv"));
    Json sj;
    sj["seed"] = cfg.split_seed;
    for (auto [name, part] : {std::pair<const char*, const dataset::LabeledDataset*>{"train", &split.train},
                              {"val", &split.val},
                              {"test", &split.test}}) {
      sj[name]["patients"] = part->PatientIds();
      sj[name]["slices"] = part->size();
    }
    detail::WriteJson(artifact("split", "split.json"), sj);
  });

  detail::Stage("balance", timings, log, [&] {
    train = cfg.balance ? dataset::Rebalance(split.train, cfg.balance_seed) : split.train;
    dataset::WriteManifest(train, artifact("train_balanced", "train_balanced.csv"));
    const auto before = split.train.ClassCounts(), after = train.ClassCounts();
    std::vector<double> b(before.begin(), before.end()), a(after.begin(), after.end());
    svg::WriteFile(artifact("class_distribution", "class_distribution.svg"),
                   svg::BarChart("Training class distribution", "slices", train.class_names,
                                 {{"before balancing", b}, {"after balancing", a}}));
  });

  detail::Stage("extract", timings, log, [&] {
    const auto ex = MakeExtractor(cfg);
    extractor_name = ex.name();
    feature_dim = ex.output_dim();
    // Each distinct tensor is extracted once; partitions index into it.
    std::map<std::string, std::size_t> row_of;
    std::vector<preprocess::TensorImage> tensors;
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      for (const auto& s : part->samples) {
        if (row_of.emplace(s.sample_ref, tensors.size()).second) {
          tensors.push_back(LoadTensor(work / s.sample_ref));
        }
      }
    }
    const auto fm = features::ExtractFeatures(tensors, ex, cfg.threads);
    auto gather = [&](const dataset::LabeledDataset& ds, const std::string& key,
                      const std::string& file) {
      features::FeatureMatrix out{Matrix<float>(ds.size(), fm.d())};
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto src = fm.values.row(row_of.at(ds.samples[i].sample_ref));
        std::copy(src.begin(), src.end(), out.values.row(i).begin());
      }
      const auto labels = ds.Labels();
      features::SaveFeatureStore(out, labels, artifact(key, file));
      return out;
    };
    f_train = gather(train, "features_train", "features_train.fvs");
    f_val = gather(split.val, "features_val", "features_val.fvs");
    f_test = gather(split.test, "features_test", "features_test.fvs");
  });

  detail::Stage("train", timings, log, [&] {
    const auto labels = train.Labels();
    const int k = static_cast<int>(train.num_classes());
    if (cfg.classifier == "gbdt") {
      auto c = cfg.gbdt;
      c.num_classes = k;
      c.threads = cfg.threads;
      model = classifiers::TrainGbdt(f_train, labels, c);
    } else if (cfg.classifier == "forest") {
      auto c = cfg.forest;
      c.num_classes = k;
      c.threads = cfg.threads;
      model = classifiers::TrainForest(f_train, labels, c);
    } else {
      auto c = cfg.svc;
      c.num_classes = k;
      model = classifiers::TrainLinearSvc(f_train, labels, c);
    }
    classifiers::SaveModel(model, artifact("model", "model.mdl"));
    if (const auto* g = std::get_if<classifiers::GbdtModel>(&model); g && !g->train_loss.empty()) {
      svg::WriteFile(artifact("loss_curve", "loss_curve.svg"),
                     svg::LineChart("Training log loss", "boosting round", "log loss",
                                    {{"train", g->train_loss}}));
    }
  });

  detail::Stage("evaluate", timings, log, [&] {
    auto eval = [&](const dataset::LabeledDataset& ds, const features::FeatureMatrix& fm) {
      const auto p = Predict(model, fm);
      const auto truth = ds.Labels();
      return metrics::Evaluate(truth, p.labels, p.scores, p.probabilities, ds.class_names);
    };
    test_report = eval(split.test, f_test);
    if (split.val.size() > 0) val_report = eval(split.val, f_val);
    detail::WriteJson(artifact("report_json", "report.json"), metrics::ToJson(test_report));
    detail::WriteText(artifact("report_text", "report.txt"),
                      RenderReportText(test_report, cfg.report_digits));
  });

  Json rec;
  rec["schema_version"] = kSchemaVersion;
  rec["run_name"] = cfg.run_name;
  rec["config"] = ConfigSnapshot(cfg);
  rec["model"] = {{"classifier", cfg.classifier}, {"extractor", extractor_name},
                  {"feature_dim", feature_dim}};
  rec["class_counts"] = {{"train_before", detail::CountsJson(split.train)},
                         {"train_after", detail::CountsJson(train)},
                         {"val", detail::CountsJson(split.val)},
                         {"test", detail::CountsJson(split.test)}};
  rec["test_set"] = {{"size", split.test.size()}, {"hash", detail::PartitionHash(split.test)}};
  rec["artifacts"] = artifacts;
  rec["report"] = metrics::ToJson(test_report);
  rec["validation_report"] = val_report ? metrics::ToJson(*val_report) : Json(nullptr);
  rec["timings_ms"] = timings;
  for (const auto& [key, rel] : artifacts.items()) {
    if (!fs::exists(run_dir / rel.get<std::string>())) {
      Fail(ErrorCode::kIo, "artifact missing at record time: " + rel.get<std::string>());
    }
  }
  detail::WriteJson(run_dir / "run_record.json", rec);
  if (log) log("run: test micro F1 " + metrics::detail::Fixed(test_report.micro.f1, 4));
  return {run_dir, rec, test_report};
}

// ---------------------------------------------------------------------------
// compare and report

// Accepts a run directory or a run_record.json path.
inline Json LoadRunRecord(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "run_record.json" : path;
  Json rec = detail::ReadJson(file);
  if (!rec.contains("schema_version") || rec["schema_version"] != kSchemaVersion) {
    Fail(ErrorCode::kMalformedValue, file.string() + ": unsupported or missing schema_version");
  }
  return rec;
}

struct Comparison {
  std::string text;
  Json json;
};

inline Comparison CmdCompare(const std::vector<fs::path>& records, int digits = 2) {
  if (records.size() < 2) Fail(ErrorCode::kConfig, "compare needs at least two run records");
  std::vector<Json> recs;
  for (const auto& p : records) recs.push_back(LoadRunRecord(p));
  const std::string hash = recs[0].at("test_set").at("hash");
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].at("test_set").at("hash") != hash) {
      Fail(ErrorCode::kMismatchedTestSets, records[0].string() + " and " + records[i].string() +
                                               " were evaluated on different test sets");
    }
  }
  std::vector<std::string> names;
  std::vector<std::vector<std::pair<std::string, std::optional<double>>>> panels;
  Comparison out;
  out.json["test_set_hash"] = hash;
  out.json["models"] = Json::array();
  for (const auto& r : recs) {
    const auto report = metrics::ReportFromJson(r.at("report"));
    names.push_back(r.at("run_name").get<std::string>() + " (" + r.at("model").at("extractor").get<std::string>() +
                    " + " + r.at("model").at("classifier").get<std::string>() + ")");
    panels.push_back(metrics::PanelValues(report));
    Json values = Json::object();
    for (const auto& [m, v] : panels.back()) values[m] = v ? Json(*v) : Json(nullptr);
    out.json["models"].push_back({{"run_name", r.at("run_name")},
                                  {"extractor", r.at("model").at("extractor")},
                                  {"classifier", r.at("model").at("classifier")},
                                  {"values", values}});
  }
  Json metric_names = Json::array();
  for (const auto& [m, v] : panels[0]) metric_names.push_back(m);
  out.json["metrics"] = metric_names;

  std::size_t first = std::string("Metric").size();
  for (const auto& [m, v] : panels[0]) first = std::max(first, m.size());
  std::vector<std::size_t> widths;
  for (const auto& n : names) widths.push_back(std::max<std::size_t>(n.size(), 8) + 2);
  std::ostringstream t;
  t << "Metric" << std::string(first - 6, ' ');
  for (std::size_t c = 0; c < names.size(); ++c) t << metrics::detail::PadLeft(names[c], widths[c]);
  t << '\n';
  for (std::size_t row = 0; row < panels[0].size(); ++row) {
    const auto& m = panels[0][row].first;
    t << m << std::string(first - m.size(), ' ');
    for (std::size_t c = 0; c < names.size(); ++c) {
      const auto& v = panels[c][row].second;
      t << metrics::detail::PadLeft(v ? metrics::detail::Fixed(*v, digits) : "n/a", widths[c]);
    }
    t << '\n';
  }
  out.text = t.str();
  return out;
}

// Re-renders report.txt from the stored record and returns its text.
inline std::string CmdReport(const fs::path& run) {
  const fs::path dir = fs::is_directory(run) ? run : run.parent_path();
  const Json rec = LoadRunRecord(run);
  int digits = 2;
  if (rec.contains("config") && rec["config"].contains("report.digits")) {
    digits = detail::ParseNumber<int>("report.digits", rec["config"]["report.digits"].get<std::string>());
  }
  const auto report = metrics::ReportFromJson(rec.at("report"));
  const std::string text = RenderReportText(report, digits);
  detail::WriteText(dir / "report.txt", text);
  return text;
}

}  // namespace skullfx::pipeline
