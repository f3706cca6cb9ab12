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

// Synthetic labeled DICOM study on disk plus a matching pipeline config.
#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "skullfx/pipeline/config.hpp"
#include "skullfx/pipeline/run.hpp"

namespace skullfx::testing {

// Removed with its contents on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& stem) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("skullfx_" + stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct StudySpec {
  int patients = 12;
  int slices = 8;
  std::size_t side = 64;
  std::uint64_t seed = 1;
};

// Writes the study under root/study and returns a config whose work_dir is
// root/work; tensors keep the image side so the toy extractor stays small.
inline pipeline::PipelineConfig MakeStudy(const std::filesystem::path& root, const StudySpec& spec) {
  pipeline::SynthOptions opt;
  opt.series.patients = spec.patients;
  opt.series.slices_per_patient = spec.slices;
  opt.series.side = spec.side;
  opt.series.seed = spec.seed;
  pipeline::CmdSynth(root / "study", opt);
  pipeline::PipelineConfig cfg;
  cfg.input_dir = (root / "study" / "dicom").string();
  cfg.labels = (root / "study" / "labels.csv").string();
  cfg.work_dir = (root / "work").string();
  cfg.preprocess.out_side = spec.side;
  return cfg;
}

}  // namespace skullfx::testing
