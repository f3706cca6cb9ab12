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

// Deterministic synthetic data: ellipse phantoms, skull-like CT series with
// three lesion patterns, and Gaussian-blob image sets. Used by the fixture
// generator, the test suites and the acceptance benchmarks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "skullfx/dicom.hpp"
#include "skullfx/preprocess.hpp"

namespace skullfx::synthetic {

struct Ellipse {
  double cx = 0.0, cy = 0.0;        // centre (column, row)
  double semi_major = 1.0;          // along `angle_deg`
  double semi_minor = 1.0;
  double angle_deg = 0.0;           // from +column towards +row

  bool Contains(double x, double y) const {
    const double t = angle_deg * std::numbers::pi / 180.0;
    const double dx = x - cx, dy = y - cy;
    const double u = std::cos(t) * dx + std::sin(t) * dy;
    const double v = -std::sin(t) * dx + std::cos(t) * dy;
    return (u * u) / (semi_major * semi_major) + (v * v) / (semi_minor * semi_minor) <= 1.0;
  }
};

inline preprocess::BinaryMask EllipseMask(std::size_t width, std::size_t height, const Ellipse& e) {
  preprocess::BinaryMask m{Matrix<std::uint8_t>(height, width, 0)};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      m.bits(r, c) = e.Contains(static_cast<double>(c), static_cast<double>(r)) ? 1 : 0;
    }
  }
  return m;
}

inline preprocess::HuImage EllipseImage(std::size_t width, std::size_t height, const Ellipse& e,
                                        double inside_hu, double outside_hu = preprocess::kAirHu) {
  preprocess::HuImage img{Matrix<double>(height, width, outside_hu)};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (e.Contains(static_cast<double>(c), static_cast<double>(r))) img.values(r, c) = inside_hu;
    }
  }
  return img;
}

struct SeriesConfig {
  int patients = 12;
  int slices_per_patient = 20;
  std::size_t side = 128;
  double max_tilt_deg = 15.0;
  double noise_hu = 20.0;
  double thickness_mm = 1.0;
  std::uint64_t seed = 1;
};

struct LabeledSlice {
  dicom::CtSlice slice;
  int class_id = 0;
};

// Head phantom: air background, bone ring, brain interior. Class 0 adds a
// bone fragment pressed into the brain, class 1 a fracture line through the
// vault, class 2 is intact. Each patient carries a single class; position,
// size and tilt vary per slice. Stored values are HU + 1024, unsigned.
inline std::vector<LabeledSlice> MakeSeries(const SeriesConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_hu);
  const double side = static_cast<double>(cfg.side);
  std::vector<LabeledSlice> out;

  for (int p = 0; p < cfg.patients; ++p) {
    const int class_id = p % 3;
    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%03d", p + 1);
    for (int s = 0; s < cfg.slices_per_patient; ++s) {
      const double a = side * (0.30 + 0.06 * unit(rng));
      const double b = a * (0.72 + 0.08 * unit(rng));
      Ellipse head{side / 2 + side * 0.08 * (unit(rng) - 0.5), side / 2 + side * 0.08 * (unit(rng) - 0.5),
                   a, b, cfg.max_tilt_deg * (2.0 * unit(rng) - 1.0)};
      Ellipse brain = head;
      brain.semi_major -= side * 0.04;
      brain.semi_minor -= side * 0.04;
      const double t = head.angle_deg * std::numbers::pi / 180.0;
      // Unit vectors of the head's own axes.
      const double ux = std::cos(t), uy = std::sin(t), vx = -std::sin(t), vy = std::cos(t);

      dicom::CtSlice slice;
      slice.patient_id = pid;
      slice.instance_number = s + 1;
      slice.rows = slice.cols = static_cast<std::uint32_t>(cfg.side);
      slice.bits_allocated = 16;
      slice.bits_stored = 12;
      slice.pixel_representation = 0;
      slice.rescale_slope = 1.0;
      slice.rescale_intercept = -1024.0;
      slice.slice_thickness_mm = cfg.thickness_mm;
      slice.pixels = Matrix<std::int32_t>(cfg.side, cfg.side);

      const double frag_u = 0.35 * (unit(rng) - 0.5) * brain.semi_major;
      for (std::size_t r = 0; r < cfg.side; ++r) {
        for (std::size_t c = 0; c < cfg.side; ++c) {
          const double x = static_cast<double>(c), y = static_cast<double>(r);
          double hu = preprocess::kAirHu;
          if (head.Contains(x, y)) hu = brain.Contains(x, y) ? 40.0 : 1400.0;
          const double u = (x - head.cx) * ux + (y - head.cy) * uy;
          const double v = (x - head.cx) * vx + (y - head.cy) * vy;
          if (class_id == 0) {
            // Depressed fragment: bone disc under the upper vault.
            const double du = u - frag_u, dv = v + brain.semi_minor * 0.6;
            if (du * du + dv * dv < std::pow(brain.semi_minor * 0.35, 2)) hu = 1400.0;
          } else if (class_id == 1) {
            // Linear fracture: an air gap across the vault plus a bright seam.
            if (std::abs(u) < side * 0.015 && head.Contains(x, y) && !brain.Contains(x, y)) {
              hu = preprocess::kAirHu + 200.0;
            }
            if (std::abs(v) < side * 0.02 && brain.Contains(x, y)) hu = 900.0;
          }
          if (hu > preprocess::kAirHu) hu += noise(rng);
          const double stored = std::clamp(std::round(hu + 1024.0), 0.0, 4095.0);
          slice.pixels(r, c) = static_cast<std::int32_t>(stored);
        }
      }
      out.push_back({std::move(slice), class_id});
    }
  }
  return out;
}

struct BlobConfig {
  std::size_t per_class = 300;
  std::size_t classes = 3;
  std::size_t side = 32;
  double pixel_sigma = 0.10;
  std::uint64_t template_seed = 1;
  std::uint64_t sample_seed = 2;
};

struct BlobSet {
  std::vector<preprocess::TensorImage> images;
  std::vector<int> labels;
};

// Each class is an isotropic Gaussian blob around a fixed random template
// image (values clipped to [0, 1]). Samples interleave classes.
inline BlobSet MakeBlobImages(const BlobConfig& cfg) {
  std::mt19937_64 trng(cfg.template_seed);
  std::uniform_real_distribution<double> level(0.2, 0.8);
  std::vector<std::vector<double>> templates(cfg.classes, std::vector<double>(cfg.side * cfg.side));
  for (auto& t : templates) {
    for (double& v : t) v = level(trng);
  }
  std::mt19937_64 rng(cfg.sample_seed);
  std::normal_distribution<double> noise(0.0, cfg.pixel_sigma);
  BlobSet set;
  for (std::size_t i = 0; i < cfg.per_class; ++i) {
    for (std::size_t k = 0; k < cfg.classes; ++k) {
      preprocess::TensorImage img{cfg.side, Matrix<float>(cfg.side, cfg.side)};
      for (std::size_t j = 0; j < img.values.size(); ++j) {
        img.values.data()[j] = static_cast<float>(std::clamp(templates[k][j] + noise(rng), 0.0, 1.0));
      }
      set.images.push_back(std::move(img));
      set.labels.push_back(static_cast<int>(k));
    }
  }
  return set;
}

}  // namespace skullfx::synthetic
