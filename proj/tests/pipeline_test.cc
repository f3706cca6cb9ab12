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

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "skullfx/pipeline/cache.hpp"
#include "skullfx/pipeline/config.hpp"
#include "skullfx/pipeline/run.hpp"
#include "skullfx/pipeline/svg.hpp"
#include "support/study.hpp"

namespace skullfx::pipeline {
namespace {

namespace fs = std::filesystem;
using testing::MakeStudy;
using testing::ScratchDir;
using testing::StudySpec;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

std::string DetailOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.detail();
  }
  return "";
}

// Config -------------------------------------------------------------------

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(ValidateConfig(PipelineConfig{})); }

TEST(Config, CanonicalTextRoundTrips) {
  PipelineConfig a;
  ApplyConfigText(a, "split.seed = 9\ngbdt.learning_rate = 0.3\nclassifier.kind = forest\n"
                     "preprocess.tilt = false\npaths.work_dir = /tmp/x y\n");
  PipelineConfig b;
  ApplyConfigText(b, FormatConfig(a));
  EXPECT_EQ(FormatConfig(a), FormatConfig(b));
  EXPECT_EQ(b.split_seed, 9u);
  EXPECT_EQ(b.gbdt.learning_rate, 0.3);
  EXPECT_EQ(b.classifier, "forest");
  EXPECT_FALSE(b.preprocess.tilt_enabled);
  EXPECT_EQ(b.work_dir, "/tmp/x y");
}

TEST(Config, CommentsAndBlankLinesIgnored) {
  PipelineConfig c;
  ApplyConfigText(c, "# header\n\n   \n  svc.c = 2.5  \r\n# svc.c = 9\n");
  EXPECT_EQ(c.svc.C, 2.5);
}

TEST(Config, UnknownKeyNamesLine) {
  PipelineConfig c;
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "split.seed = 1\n\nsplit.sede = 2\n", "a.cfg"); }),
            ErrorCode::kConfig);
  const auto detail = DetailOf([&] { ApplyConfigText(c, "split.seed = 1\n\nsplit.sede = 2\n", "a.cfg"); });
  EXPECT_NE(detail.find("a.cfg:3"), std::string::npos) << detail;
  EXPECT_NE(detail.find("split.sede"), std::string::npos) << detail;
}

TEST(Config, DuplicateKeyRejected) {
  PipelineConfig c;
  const auto detail = DetailOf([&] { ApplyConfigText(c, "svc.c = 1\nsvc.c = 2\n"); });
  EXPECT_NE(detail.find(":2"), std::string::npos) << detail;
}

TEST(Config, MalformedLinesAndValues) {
  PipelineConfig c;
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "split.seed\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "split.seed = -1\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "svc.c = 1.0x\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "svc.c = nan\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([&] { ApplyConfigText(c, "balance.enabled = maybe\n"); }), ErrorCode::kConfig);
}

TEST(Config, FractionsMustSumToOne) {
  PipelineConfig c;
  c.fractions = {0.4, 0.2, 0.3};
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
  c.fractions = {0.7, 0.0, 0.3};
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
}

TEST(Config, CrossFieldChecks) {
  auto bad = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    return CodeOf([&] { ValidateConfig(c); });
  };
  EXPECT_EQ(bad([](PipelineConfig& c) { c.classifier = "xgb"; }), ErrorCode::kConfig);
  EXPECT_EQ(bad([](PipelineConfig& c) { c.extractor = "interchange"; }), ErrorCode::kConfig);
  EXPECT_EQ(bad([](PipelineConfig& c) { c.run_name = "../up"; }), ErrorCode::kConfig);
  EXPECT_EQ(bad([](PipelineConfig& c) { c.threads = 0; }), ErrorCode::kConfig);
  EXPECT_EQ(bad([](PipelineConfig& c) { c.svc.C = 0; }), ErrorCode::kConfig);
  EXPECT_EQ(bad([](PipelineConfig& c) { c.gbdt.learning_rate = -1; }), ErrorCode::kConfig);
}

// Every key is settable by name and reads back what was set.
TEST(Config, EveryKeyAddressable) {
  std::set<std::string> names;
  PipelineConfig c;
  for (const auto& k : ConfigKeys()) {
    EXPECT_TRUE(names.insert(k.name).second) << k.name;
    EXPECT_NE(k.name.find('.'), std::string::npos) << k.name;
    const std::string value = k.get(c);
    EXPECT_NO_THROW(SetKey(c, k.name, value)) << k.name;
    EXPECT_EQ(k.get(c), value) << k.name;
  }
  EXPECT_EQ(ConfigSnapshot(c).size(), ConfigKeys().size());
}

// Cache --------------------------------------------------------------------

TEST(Cache, Fnv1aReferenceVectors) {
  EXPECT_EQ(Fnv1a64().value(), 0xcbf29ce484222325ull);
  EXPECT_EQ(Fnv1a64().Update("a").value(), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(Fnv1a64().Update("foobar").value(), 0x85944171f73967e8ull);
  EXPECT_EQ(Hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
}

TEST(Cache, KeyDependsOnBytesAndPreprocessSettings) {
  const std::vector<std::uint8_t> a{1, 2, 3}, b{1, 2, 4};
  preprocess::PreprocessConfig p;
  const auto k = CacheKey(a, p);
  EXPECT_EQ(k, CacheKey(a, p));
  EXPECT_NE(k, CacheKey(b, p));
  auto q = p;
  q.out_side = 112;
  EXPECT_NE(k, CacheKey(a, q));
  q = p;
  q.tilt_enabled = false;
  EXPECT_NE(k, CacheKey(a, q));
  q = p;
  q.threshold_hu = -499.0;
  EXPECT_NE(k, CacheKey(a, q));
  q = p;
  q.debug_dir = "/tmp";
  EXPECT_EQ(k, CacheKey(a, q));
}

TEST(Cache, TensorRoundTripAndCorruption) {
  ScratchDir dir("tensor");
  preprocess::TensorImage t{5, Matrix<float>(5, 5)};
  for (std::size_t i = 0; i < 25; ++i) t.values.data()[i] = static_cast<float>(i) / 7.0f;
  const auto path = dir.path() / "t.tns";
  SaveTensor(t, path);
  const auto back = LoadTensor(path);
  EXPECT_EQ(back.side, 5u);
  EXPECT_EQ(back.values.data(), t.values.data());
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));

  const std::string bytes = Slurp(path);
  WriteFileAtomic(path, bytes.substr(0, bytes.size() - 1));
  EXPECT_EQ(CodeOf([&] { LoadTensor(path); }), ErrorCode::kTruncatedStore);
  WriteFileAtomic(path, "TNS2" + bytes.substr(4));
  EXPECT_EQ(CodeOf([&] { LoadTensor(path); }), ErrorCode::kBadMagic);
  EXPECT_EQ(CodeOf([&] { LoadTensor(dir.path() / "missing.tns"); }), ErrorCode::kIo);
}

// SVG ----------------------------------------------------------------------

int Count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

TEST(Svg, BarChartGeometry) {
  const auto a = svg::BarChart("t", "y", {"A", "B & C", "D"},
                               {{"before", {5944, 3205, 6040}}, {"after", {6040, 6040, 6040}}});
  EXPECT_EQ(a, svg::BarChart("t", "y", {"A", "B & C", "D"},
                             {{"before", {5944, 3205, 6040}}, {"after", {6040, 6040, 6040}}}));
  // background + 6 bars + 2 legend swatches
  EXPECT_EQ(Count(a, "<rect"), 9);
  EXPECT_NE(a.find("B &amp; C"), std::string::npos);
  EXPECT_NE(a.find(">3205.00<"), std::string::npos);
  EXPECT_EQ(a.rfind("</svg>\n"), a.size() - 7);
  EXPECT_EQ(CodeOf([] { svg::BarChart("t", "y", {"A"}, {{"s", {1, 2}}}); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Svg, LineChartPointsScaled) {
  const auto s = svg::LineChart("loss", "round", "v", {{"train", {1.0, 0.5, 0.0}}});
  // y top is 1.00; plot spans x 70..620 and y 40..330.
  EXPECT_NE(s.find("points=\"70.00,40.00 345.00,185.00 620.00,330.00\""), std::string::npos) << s;
}

TEST(Svg, NiceSteps) {
  EXPECT_EQ(svg::detail::NiceStep(6040, 5), 2000);
  EXPECT_EQ(svg::detail::NiceStep(1.0, 5), 0.2);
  EXPECT_EQ(svg::detail::NiceStep(0.0, 5), 1.0);
}

// Labels -------------------------------------------------------------------

TEST(SliceLabels, ParsesAndRejects) {
  ScratchDir dir("labels");
  const auto path = dir.path() / "labels.csv";
  WriteFileAtomic(path, "patient_id,instance_number,class\nP1,3,Linear Fracture\r\nP1,4,\"Not Fractured\"\n");
  const auto names = dataset::DefaultClassNames();
  const auto m = LoadSliceLabels(path, names);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at({"P1", 3}), 1);
  EXPECT_EQ(m.at({"P1", 4}), 2);

  WriteFileAtomic(path, "patient_id,instance_number,class\nP1,x,Linear Fracture\n");
  EXPECT_EQ(CodeOf([&] { LoadSliceLabels(path, names); }), ErrorCode::kMalformedRow);
  WriteFileAtomic(path, "patient_id,instance_number,class\nP1,1,Hairline\n");
  EXPECT_EQ(CodeOf([&] { LoadSliceLabels(path, names); }), ErrorCode::kUnknownClassName);
  WriteFileAtomic(path, "patient_id,instance_number,class\nP1,1,Linear Fracture\nP1,1,Not Fractured\n");
  EXPECT_EQ(CodeOf([&] { LoadSliceLabels(path, names); }), ErrorCode::kDuplicateSampleRef);
  WriteFileAtomic(path, "pid,instance,class\n");
  EXPECT_EQ(CodeOf([&] { LoadSliceLabels(path, names); }), ErrorCode::kMalformedRow);
}

// Ingest -------------------------------------------------------------------

TEST(Ingest, ThreePatientStudyPopulatesCache) {
  ScratchDir dir("ingest3");
  const auto cfg = MakeStudy(dir.path(), {3, 4, 48, 7});
  const auto sum = CmdIngest(cfg);
  EXPECT_EQ(sum.patients, (std::vector<std::string>{"P001", "P002", "P003"}));
  EXPECT_EQ(sum.processed, 12u);
  EXPECT_EQ(sum.cached, 0u);
  const auto ds = dataset::LoadManifest(fs::path(cfg.work_dir) / "manifest.csv");
  EXPECT_EQ(ds.size(), 12u);
  EXPECT_EQ(ds.PatientIds().size(), 3u);
  EXPECT_EQ(ds.ClassCounts(), (std::vector<std::size_t>{4, 4, 4}));
  for (const auto& s : ds.samples) {
    EXPECT_TRUE(std::regex_match(s.sample_ref, std::regex("cache/[0-9a-f]{16}\\.tns"))) << s.sample_ref;
    EXPECT_EQ(LoadTensor(fs::path(cfg.work_dir) / s.sample_ref).side, 48u);
  }
  const auto rec = nlohmann::json::parse(Slurp(fs::path(cfg.work_dir) / "ingest_record.json"));
  EXPECT_EQ(rec["schema_version"], kSchemaVersion);
  EXPECT_EQ(rec["labeled"], 12);
}

TEST(Ingest, RerunReprocessesNothing) {
  ScratchDir dir("ingest_rerun");
  const auto cfg = MakeStudy(dir.path(), {3, 3, 40, 2});
  CmdIngest(cfg);
  const std::string manifest = Slurp(fs::path(cfg.work_dir) / "manifest.csv");
  const auto again = CmdIngest(cfg);
  EXPECT_EQ(again.processed, 0u);
  EXPECT_EQ(again.cached, 9u);
  EXPECT_EQ(Slurp(fs::path(cfg.work_dir) / "manifest.csv"), manifest);

  // Changing a preprocessing setting invalidates every entry.
  auto changed = cfg;
  changed.preprocess.tilt_enabled = false;
  EXPECT_EQ(CmdIngest(changed).processed, 9u);
}

TEST(Ingest, ThreadsDoNotChangeTensors) {
  ScratchDir a("ingest_t1"), b("ingest_t4");
  auto ca = MakeStudy(a.path(), {3, 4, 40, 5});
  auto cb = MakeStudy(b.path(), {3, 4, 40, 5});
  cb.threads = 4;
  CmdIngest(ca);
  CmdIngest(cb);
  EXPECT_EQ(Slurp(fs::path(ca.work_dir) / "manifest.csv"), Slurp(fs::path(cb.work_dir) / "manifest.csv"));
  for (const auto& s : dataset::LoadManifest(fs::path(ca.work_dir) / "manifest.csv").samples) {
    EXPECT_EQ(Slurp(fs::path(ca.work_dir) / s.sample_ref), Slurp(fs::path(cb.work_dir) / s.sample_ref));
  }
}

TEST(Ingest, CorruptAndUnlabeledFilesWarned) {
  ScratchDir dir("ingest_corrupt");
  const auto cfg = MakeStudy(dir.path(), {3, 2, 32, 3});
  const fs::path good = fs::path(cfg.input_dir) / "P001" / "P001_0001.dcm";
  const std::string bytes = Slurp(good);
  WriteFileAtomic(fs::path(cfg.input_dir) / "P001" / "broken.dcm", bytes.substr(0, 200));
  // Same content under another patient id is unlabeled.
  auto slices = synthetic::MakeSeries({1, 1, 32, 15.0, 20.0, 1.0, 99});
  slices[0].slice.patient_id = "P404";
  const auto extra = dicom::WriteDicom(dicom::SliceToElements(slices[0].slice),
                                       dicom::TransferSyntax::kExplicitVrLittleEndian);
  WriteFileAtomic(fs::path(cfg.input_dir) / "stray.dcm", std::string(extra.begin(), extra.end()));

  std::vector<std::string> logged;
  const auto sum = CmdIngest(cfg, [&](const std::string& m) { logged.push_back(m); });
  EXPECT_EQ(sum.processed, 6u);
  EXPECT_EQ(sum.unlabeled, 1u);
  auto mentions = [&](const std::string& needle) {
    return std::any_of(sum.warnings.begin(), sum.warnings.end(),
                       [&](const std::string& w) { return w.find(needle) != std::string::npos; });
  };
  EXPECT_TRUE(mentions("broken.dcm"));
  EXPECT_TRUE(mentions("TruncatedFile"));
  EXPECT_TRUE(mentions("P404"));
  EXPECT_TRUE(std::any_of(logged.begin(), logged.end(),
                          [](const std::string& m) { return m.find("broken.dcm") != std::string::npos; }));
}

TEST(Ingest, Errors) {
  ScratchDir dir("ingest_err");
  auto cfg = MakeStudy(dir.path(), {3, 1, 32, 3});
  auto no_input = cfg;
  no_input.input_dir.clear();
  EXPECT_EQ(CodeOf([&] { CmdIngest(no_input); }), ErrorCode::kConfig);
  auto thick = cfg;
  thick.thickness_mm = 5.0;
  EXPECT_EQ(CodeOf([&] { CmdIngest(thick); }), ErrorCode::kEmptySeries);
  fs::create_directories(dir.path() / "empty");
  auto empty = cfg;
  empty.input_dir = (dir.path() / "empty").string();
  EXPECT_EQ(CodeOf([&] { CmdIngest(empty); }), ErrorCode::kEmptySeries);
}

// Run ----------------------------------------------------------------------

class RunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new ScratchDir("run");
    cfg_ = new PipelineConfig(MakeStudy(dir_->path(), {30, 8, 96, 1}));
    CmdIngest(*cfg_);
  }
  static void TearDownTestSuite() {
    delete cfg_;
    delete dir_;
  }
  static PipelineConfig Config(const std::string& name, const std::string& kind = "gbdt") {
    PipelineConfig c = *cfg_;
    c.run_name = name;
    c.classifier = kind;
    c.gbdt.n_estimators = 100;
    c.forest.n_trees = 60;
    return c;
  }
  static inline ScratchDir* dir_ = nullptr;
  static inline PipelineConfig* cfg_ = nullptr;
};

TEST_F(RunTest, GbdtOnPhantomStudy) {
  const auto r = CmdRun(Config("gbdt"));
  EXPECT_GE(r.test_report.micro.f1, 0.95);
  for (const auto& [key, rel] : r.record["artifacts"].items()) {
    EXPECT_TRUE(fs::exists(r.run_dir / rel.get<std::string>())) << key;
  }
  EXPECT_TRUE(r.record["artifacts"].contains("loss_curve"));
  EXPECT_EQ(r.record["schema_version"], kSchemaVersion);
  EXPECT_EQ(r.record["config"]["classifier.kind"], "gbdt");
  EXPECT_EQ(Slurp(r.run_dir / "report.json"), r.record["report"].dump(2) + "\n");
  for (const char* stage : {"load", "split", "balance", "extract", "train", "evaluate"}) {
    EXPECT_TRUE(r.record["timings_ms"].contains(stage)) << stage;
  }
}

TEST_F(RunTest, BalanceTouchesTrainingOnly) {
  const auto r = CmdRun(Config("balance"));
  const auto& counts = r.record["class_counts"];
  const auto split = dataset::GroupedSplit(dataset::LoadManifest(fs::path(cfg_->work_dir) / "manifest.csv"),
                                           cfg_->fractions, cfg_->split_seed);
  const auto names = dataset::DefaultClassNames();
  const auto test = split.test.ClassCounts(), val = split.val.ClassCounts(), train = split.train.ClassCounts();
  std::size_t majority = *std::max_element(train.begin(), train.end());
  for (std::size_t k = 0; k < names.size(); ++k) {
    EXPECT_EQ(counts["test"][names[k]], test[k]);
    EXPECT_EQ(counts["val"][names[k]], val[k]);
    EXPECT_EQ(counts["train_before"][names[k]], train[k]);
    EXPECT_EQ(counts["train_after"][names[k]], majority);
  }
  EXPECT_EQ(dataset::LoadManifest(r.run_dir / "split_test.csv").samples, split.test.samples);
  const auto store = features::LoadFeatureStore(r.run_dir / "features_test.fvs");
  EXPECT_EQ(store.labels, split.test.Labels());
}

TEST_F(RunTest, RepeatedRunIsByteIdentical) {
  auto a = Config("same_a");
  auto b = Config("same_b");
  b.threads = 3;
  const auto ra = CmdRun(a), rb = CmdRun(b);
  EXPECT_EQ(Slurp(ra.run_dir / "report.json"), Slurp(rb.run_dir / "report.json"));
  EXPECT_EQ(Slurp(ra.run_dir / "report.txt"), Slurp(rb.run_dir / "report.txt"));
  for (const char* f : {"class_distribution.svg", "loss_curve.svg", "model.mdl", "features_train.fvs",
                        "split.json", "train_balanced.csv"}) {
    EXPECT_EQ(Slurp(ra.run_dir / f), Slurp(rb.run_dir / f)) << f;
  }
  auto strip = [](nlohmann::ordered_json j) {
    j.erase("timings_ms");
    j.erase("run_name");
    j["config"].erase("run.name");
    j["config"].erase("run.threads");
    return j;
  };
  EXPECT_EQ(strip(ra.record), strip(rb.record));
}

TEST_F(RunTest, InvalidConfigFailsBeforeWork) {
  auto c = Config("never");
  c.fractions = {0.4, 0.2, 0.3};
  EXPECT_EQ(CodeOf([&] { CmdRun(c); }), ErrorCode::kConfig);
  EXPECT_FALSE(fs::exists(fs::path(c.work_dir) / "runs" / "never"));
}

TEST_F(RunTest, StageErrorsNameTheStage) {
  auto c = Config("nowhere");
  c.work_dir = (dir_->path() / "missing").string();
  EXPECT_EQ(DetailOf([&] { CmdRun(c); }).rfind("stage load:", 0), 0u);

  auto wrong_side = Config("wrong_side");
  wrong_side.preprocess.out_side = 32;  // cached tensors are 96 wide
  const auto detail = DetailOf([&] { CmdRun(wrong_side); });
  EXPECT_EQ(detail.rfind("stage extract:", 0), 0u) << detail;
}

TEST_F(RunTest, CompareAndReport) {
  std::vector<fs::path> runs;
  for (const char* kind : {"gbdt", "forest", "svc"}) {
    runs.push_back(CmdRun(Config(std::string("cmp_") + kind, kind)).run_dir);
  }
  const auto cmp = CmdCompare(runs);
  EXPECT_EQ(cmp.json["models"].size(), 3u);
  EXPECT_EQ(cmp.json["metrics"].size(), 7u);
  for (const auto& m : cmp.json["models"]) EXPECT_EQ(m["values"].size(), 7u);
  EXPECT_EQ(std::count(cmp.text.begin(), cmp.text.end(), '\n'), 8);
  EXPECT_NE(cmp.text.find("cmp_forest (toy + forest)"), std::string::npos) << cmp.text;
  EXPECT_EQ(cmp.json["models"][2]["classifier"], "svc");

  EXPECT_EQ(CodeOf([&] { CmdCompare({runs[0]}); }), ErrorCode::kConfig);
  auto other = Config("cmp_other");
  other.split_seed = 12345;
  const auto other_dir = CmdRun(other).run_dir;
  ASSERT_NE(LoadRunRecord(runs[0])["test_set"]["hash"], LoadRunRecord(other_dir)["test_set"]["hash"]);
  EXPECT_EQ(CodeOf([&] { CmdCompare({runs[0], other_dir}); }), ErrorCode::kMismatchedTestSets);

  const std::string text = Slurp(runs[1] / "report.txt");
  fs::remove(runs[1] / "report.txt");
  EXPECT_EQ(CmdReport(runs[1]), text);
  EXPECT_EQ(Slurp(runs[1] / "report.txt"), text);
  EXPECT_EQ(CmdReport(runs[1] / "run_record.json"), text);
}

TEST(ReportJson, RoundTrip) {
  const std::vector<int> truth{0, 1, 2, 2, 1, 0, 2}, pred{0, 2, 2, 2, 1, 1, 2};
  Matrix<double> prob(truth.size(), 3, 0.1);
  for (std::size_t i = 0; i < truth.size(); ++i) prob(i, static_cast<std::size_t>(pred[i])) = 0.8;
  const auto r = metrics::Evaluate(truth, pred, prob, prob, dataset::DefaultClassNames());
  const auto j = metrics::ToJson(r);
  EXPECT_EQ(metrics::ToJson(metrics::ReportFromJson(j)), j);
  EXPECT_EQ(metrics::FormatReport(metrics::ReportFromJson(j)), metrics::FormatReport(r));
  EXPECT_EQ(CodeOf([] { metrics::ReportFromJson(nlohmann::ordered_json::object()); }),
            ErrorCode::kMalformedValue);
}

}  // namespace
}  // namespace skullfx::pipeline
