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

// skullfx: command-line front end for the classification pipeline.
//
//   skullfx synth   --out DIR [--patients N ...]
//   skullfx ingest  [--config FILE] [--section.key VALUE ...]
//   skullfx run     [--config FILE] [--section.key VALUE ...]
//   skullfx compare RECORD RECORD... [--json FILE]
//   skullfx report  RUN_DIR
//   skullfx config  [--config FILE] [--section.key VALUE ...]
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skullfx/pipeline/config.hpp"
#include "skullfx/pipeline/run.hpp"

namespace {

namespace fs = std::filesystem;
namespace pl = skullfx::pipeline;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

// --config plus one override flag per configuration key.
struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> overrides;

  void Attach(CLI::App* app) {
    app->add_option("--config", file, "configuration file (section.key = value lines)")
        ->check(CLI::ExistingFile);
    for (const auto& key : pl::ConfigKeys()) {
      const std::string name = key.name;
      app->add_option_function<std::string>(
          "--" + name, [this, name](const std::string& v) { overrides[name] = v; }, key.help);
    }
  }

  pl::PipelineConfig Resolve() const {
    pl::PipelineConfig cfg = file.empty() ? pl::PipelineConfig{} : pl::LoadConfig(file);
    for (const auto& [name, value] : overrides) {
      try {
        pl::SetKey(cfg, name, value);
      } catch (const skullfx::Error& e) {
        skullfx::Fail(skullfx::ErrorCode::kConfig, "--" + name + ": " + e.detail());
      }
    }
    pl::ValidateConfig(cfg);
    return cfg;
  }
};

void Log(const std::string& msg) { std::cerr << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skull-fracture CT classification pipeline"};
  app.require_subcommand(1);

  pl::SynthOptions synth;
  synth.series.patients = 30;
  synth.series.slices_per_patient = 16;
  std::string synth_out;
  bool single_syntax = false;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic labeled DICOM study");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--patients", synth.series.patients, "number of patients")
      ->capture_default_str();
  synth_cmd->add_option("--slices", synth.series.slices_per_patient, "slices per patient")
      ->capture_default_str();
  synth_cmd->add_option("--side", synth.series.side, "image side in pixels")->capture_default_str();
  synth_cmd->add_option("--seed", synth.series.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--noise-hu", synth.series.noise_hu, "tissue noise sigma in HU")
      ->capture_default_str();
  synth_cmd->add_option("--max-tilt", synth.series.max_tilt_deg, "largest head tilt in degrees")
      ->capture_default_str();
  synth_cmd->add_option("--thickness", synth.series.thickness_mm, "slice thickness in mm")
      ->capture_default_str();
  synth_cmd->add_flag("--explicit-only", single_syntax, "write every file as explicit VR");

  ConfigOptions ingest_opts, run_opts, config_opts;
  auto* ingest_cmd = app.add_subcommand("ingest", "scan DICOM, preprocess and cache tensors");
  ingest_opts.Attach(ingest_cmd);
  auto* run_cmd = app.add_subcommand("run", "split, balance, extract, train and evaluate");
  run_opts.Attach(run_cmd);
  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
  config_opts.Attach(config_cmd);

  std::vector<std::string> records;
  std::string compare_json;
  int compare_digits = 2;
  auto* compare_cmd = app.add_subcommand("compare", "metric grid over two or more runs");
  compare_cmd->add_option("records", records, "run directories or run_record.json files")
      ->required();
  compare_cmd->add_option("--json", compare_json, "also write the grid as JSON");
  compare_cmd->add_option("--digits", compare_digits, "decimals")->capture_default_str();

  std::string report_run;
  auto* report_cmd = app.add_subcommand("report", "re-render a run's text report");
  report_cmd->add_option("run", report_run, "run directory or run_record.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth_cmd) {
      synth.mixed_syntax = !single_syntax;
      const auto n = pl::CmdSynth(synth_out, synth);
      std::cout << "wrote " << n << " slices to " << (fs::path(synth_out) / "dicom").string()
                << " and " << (fs::path(synth_out) / "labels.csv").string() << '\n';
    } else if (*ingest_cmd) {
      pl::CmdIngest(ingest_opts.Resolve(), Log);
    } else if (*run_cmd) {
      const auto result = pl::CmdRun(run_opts.Resolve(), Log);
      std::cout << pl::RenderReportText(result.test_report,
                                        run_opts.Resolve().report_digits)
                << "record: " << (result.run_dir / "run_record.json").string() << '\n';
    } else if (*config_cmd) {
      std::cout << pl::FormatConfig(config_opts.Resolve());
    } else if (*compare_cmd) {
      std::vector<fs::path> paths(records.begin(), records.end());
      const auto cmp = pl::CmdCompare(paths, compare_digits);
      std::cout << cmp.text;
      if (!compare_json.empty()) pl::WriteFileAtomic(compare_json, cmp.json.dump(2) + "\n");
    } else if (*report_cmd) {
      std::cout << pl::CmdReport(report_run);
    }
  } catch (const skullfx::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == skullfx::ErrorCode::kConfig ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
