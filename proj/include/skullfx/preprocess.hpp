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

// Slice preprocessing: HU conversion, background stripping, tilt correction,
// cropping and padding into a fixed-size normalized image.
//
// No smoothing filter is applied. Clinical slices at this resolution carry
// little noise (see EstimateNoiseSigma), and "noise removal" here means
// discarding everything outside the largest tissue component.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "skullfx/dicom.hpp"
#include "skullfx/error.hpp"
#include "skullfx/matrix.hpp"

namespace skullfx::preprocess {

inline constexpr double kAirHu = -1024.0;
inline constexpr double kWindowLowHu = -1024.0;
inline constexpr double kWindowHighHu = 3071.0;

struct HuImage {
  Matrix<double> values;

  std::size_t width() const { return values.cols(); }
  std::size_t height() const { return values.rows(); }
};

struct BinaryMask {
  Matrix<std::uint8_t> bits;

  std::size_t width() const { return bits.cols(); }
  std::size_t height() const { return bits.rows(); }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.data().begin(), bits.data().end(), 1));
  }
  bool empty() const { return count() == 0; }
};

// Square single-channel image with values in [0, 1].
struct TensorImage {
  std::size_t side = 0;
  Matrix<float> values;

  bool operator==(const TensorImage&) const = default;
};

struct PreprocessConfig {
  double threshold_hu = -500.0;
  std::size_t out_side = 224;
  bool tilt_enabled = true;
  // When set, every stage is dumped there as PGM.
  std::optional<std::filesystem::path> debug_dir;
};

inline HuImage ToHu(const dicom::CtSlice& slice) {
  HuImage img{Matrix<double>(slice.rows, slice.cols)};
  for (std::size_t i = 0; i < slice.pixels.size(); ++i) {
    img.values.data()[i] =
        static_cast<double>(slice.pixels.data()[i]) * slice.rescale_slope +
        slice.rescale_intercept;
  }
  return img;
}

// Fast Laplacian noise estimate (Immerkaer). The 3x3 kernel is the
// difference of two Laplacians, so it cancels any locally linear signal.
inline double EstimateNoiseSigma(const Matrix<double>& img) {
  const std::size_t h = img.rows(), w = img.cols();
  if (h < 3 || w < 3) {
    Fail(ErrorCode::kImageTooSmall,
         std::to_string(w) + "x" + std::to_string(h) + " (need at least 3x3)");
  }
  static constexpr double kKernel[3][3] = {{1, -2, 1}, {-2, 4, -2}, {1, -2, 1}};
  double total = 0.0;
  for (std::size_t r = 1; r + 1 < h; ++r) {
    for (std::size_t c = 1; c + 1 < w; ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          acc += kKernel[dr + 1][dc + 1] * img(r + dr, c + dc);
        }
      }
      total += std::abs(acc);
    }
  }
  const double interior = static_cast<double>((h - 2) * (w - 2));
  return std::sqrt(std::numbers::pi / 2.0) * (total / interior) / 6.0;
}

// Largest 4-connected component of {value > threshold_hu}. Among equally
// large components the one reached first in raster order wins.
inline BinaryMask BrainMask(const HuImage& img, double threshold_hu) {
  const std::size_t h = img.height(), w = img.width();
  BinaryMask best{Matrix<std::uint8_t>(h, w, 0)};
  Matrix<std::int32_t> label(h, w, -1);
  std::vector<std::size_t> stack, members, best_members;
  std::int32_t next_label = 0;

  for (std::size_t start = 0; start < h * w; ++start) {
    if (label.data()[start] >= 0 || !(img.values.data()[start] > threshold_hu)) continue;
    members.clear();
    stack.assign(1, start);
    label.data()[start] = next_label;
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      members.push_back(idx);
      const std::size_t r = idx / w, c = idx % w;
      auto visit = [&](std::size_t rr, std::size_t cc) {
        const std::size_t j = rr * w + cc;
        if (label.data()[j] < 0 && img.values.data()[j] > threshold_hu) {
          label.data()[j] = next_label;
          stack.push_back(j);
        }
      };
      if (r > 0) visit(r - 1, c);
      if (r + 1 < h) visit(r + 1, c);
      if (c > 0) visit(r, c - 1);
      if (c + 1 < w) visit(r, c + 1);
    }
    if (members.size() > best_members.size()) best_members.swap(members);
    ++next_label;
  }
  for (std::size_t idx : best_members) best.bits.data()[idx] = 1;
  return best;
}

struct MaskMoments {
  double area = 0.0;
  double cx = 0.0;  // column
  double cy = 0.0;  // row
  double mu20 = 0.0, mu02 = 0.0, mu11 = 0.0;
};

inline MaskMoments ComputeMoments(const BinaryMask& mask) {
  MaskMoments m;
  double sx = 0.0, sy = 0.0;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.bits(r, c)) continue;
      m.area += 1.0;
      sx += static_cast<double>(c);
      sy += static_cast<double>(r);
    }
  }
  if (m.area == 0.0) return m;
  m.cx = sx / m.area;
  m.cy = sy / m.area;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.bits(r, c)) continue;
      const double dx = static_cast<double>(c) - m.cx;
      const double dy = static_cast<double>(r) - m.cy;
      m.mu20 += dx * dx;
      m.mu02 += dy * dy;
      m.mu11 += dx * dy;
    }
  }
  return m;
}

// Principal-axis angle in degrees, in (-90, 90], measured from the +column
// axis towards +row. Rotationally symmetric masks report 0.
inline double OrientationDegrees(const MaskMoments& m) {
  if (std::abs(m.mu20 - m.mu02) < 1e-9 && std::abs(m.mu11) < 1e-9) return 0.0;
  return 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02) * 180.0 / std::numbers::pi;
}

namespace detail {

// Bilinear sample with pixels outside the frame reading as `fill`.
inline double SampleFill(const Matrix<double>& img, double x, double y, double fill) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto x0 = static_cast<long long>(fx), y0 = static_cast<long long>(fy);
  const double ax = x - fx, ay = y - fy;
  auto at = [&](long long yy, long long xx) {
    if (xx < 0 || yy < 0 || xx >= static_cast<long long>(img.cols()) ||
        yy >= static_cast<long long>(img.rows())) {
      return fill;
    }
    return img(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
  };
  return (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
         ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
}

// Bilinear sample with edge clamping.
inline double SampleClamp(const Matrix<double>& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.cols() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.rows() - 1));
  const auto x0 = static_cast<std::size_t>(x), y0 = static_cast<std::size_t>(y);
  const std::size_t x1 = std::min(x0 + 1, img.cols() - 1);
  const std::size_t y1 = std::min(y0 + 1, img.rows() - 1);
  const double ax = x - static_cast<double>(x0), ay = y - static_cast<double>(y0);
  return (1 - ay) * ((1 - ax) * img(y0, x0) + ax * img(y0, x1)) +
         ay * ((1 - ax) * img(y1, x0) + ax * img(y1, x1));
}

}  // namespace detail

struct TiltResult {
  HuImage image;
  BinaryMask mask;
  double angle_deg = 0.0;
};

// Rotates image and mask by -angle about the mask centroid so the mask's
// principal axis lies along the column axis.
inline TiltResult TiltCorrect(const HuImage& img, const BinaryMask& mask) {
  const MaskMoments m = ComputeMoments(mask);
  if (m.area == 0.0) Fail(ErrorCode::kEmptyMask, "tilt correction needs a non-empty mask");
  const double angle = OrientationDegrees(m);
  if (angle == 0.0) return TiltResult{img, mask, 0.0};

  const double theta = angle * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const std::size_t h = img.height(), w = img.width();

  Matrix<double> mask_real(h, w);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) mask_real.data()[i] = mask.bits.data()[i];

  TiltResult out{HuImage{Matrix<double>(h, w)}, BinaryMask{Matrix<std::uint8_t>(h, w, 0)}, angle};
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dx = static_cast<double>(c) - m.cx;
      const double dy = static_cast<double>(r) - m.cy;
      const double sx = m.cx + ct * dx - st * dy;
      const double sy = m.cy + st * dx + ct * dy;
      out.image.values(r, c) = detail::SampleFill(img.values, sx, sy, kAirHu);
      out.mask.bits(r, c) = detail::SampleFill(mask_real, sx, sy, 0.0) >= 0.5 ? 1 : 0;
    }
  }
  return out;
}

inline float NormalizeHu(double hu) {
  const double v = (hu - kWindowLowHu) / (kWindowHighHu - kWindowLowHu);
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

struct BoundingBox {
  std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;
};

inline std::optional<BoundingBox> MaskBounds(const BinaryMask& mask) {
  std::size_t r0 = mask.height(), r1 = 0, c0 = mask.width(), c1 = 0;
  bool any = false;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.bits(r, c)) continue;
      any = true;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
  }
  if (!any) return std::nullopt;
  return BoundingBox{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

// Crops to the mask bounding box, pads the short side symmetrically with air
// (odd remainders go to the bottom/right), resizes to out_side and maps the
// [-1024, 3071] HU window onto [0, 1].
inline TensorImage CropAndPad(const HuImage& img, const BinaryMask& mask, std::size_t out_side) {
  if (out_side == 0) Fail(ErrorCode::kShapeMismatch, "out_side must be positive");
  const auto box = MaskBounds(mask);
  if (!box) Fail(ErrorCode::kEmptyMask, "nothing to crop");

  const std::size_t side = std::max(box->rows, box->cols);
  const std::size_t off_r = (side - box->rows) / 2, off_c = (side - box->cols) / 2;
  Matrix<double> square(side, side, kAirHu);
  for (std::size_t r = 0; r < box->rows; ++r) {
    for (std::size_t c = 0; c < box->cols; ++c) {
      square(off_r + r, off_c + c) = img.values(box->row0 + r, box->col0 + c);
    }
  }

  TensorImage out{out_side, Matrix<float>(out_side, out_side)};
  const double scale = static_cast<double>(side) / static_cast<double>(out_side);
  for (std::size_t r = 0; r < out_side; ++r) {
    const double sy = (static_cast<double>(r) + 0.5) * scale - 0.5;
    for (std::size_t c = 0; c < out_side; ++c) {
      const double sx = (static_cast<double>(c) + 0.5) * scale - 0.5;
      out.values(r, c) = NormalizeHu(detail::SampleClamp(square, sx, sy));
    }
  }
  return out;
}

// Writes an 8-bit binary PGM, mapping [lo, hi] linearly onto [0, 255].
template <typename T>
void WritePgm(const std::filesystem::path& path, const Matrix<T>& img, double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (T v : img.data()) {
    const double t = std::clamp((static_cast<double>(v) - lo) / (hi - lo), 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
}

// to_hu -> brain mask -> tilt correction -> crop and pad. Warnings (empty mask
// fallback, HU outside the 12-bit range) are appended to `warnings` if given.
inline TensorImage PreprocessSlice(const dicom::CtSlice& slice, const PreprocessConfig& cfg,
                                   std::vector<std::string>* warnings = nullptr) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  const std::string who = slice.source_path.empty()
                              ? slice.patient_id + "#" + std::to_string(slice.instance_number)
                              : slice.source_path;
  HuImage hu = ToHu(slice);
  const auto [lo, hi] = std::minmax_element(hu.values.data().begin(), hu.values.data().end());
  if (lo != hu.values.data().end() && (*lo < kWindowLowHu || *hi > kWindowHighHu)) {
    warn(who + ": HU values outside [-1024, 3071]");
  }

  auto dump = [&](const char* stage, const auto& m, double a, double b) {
    if (cfg.debug_dir) {
      std::filesystem::create_directories(*cfg.debug_dir);
      WritePgm(*cfg.debug_dir / (slice.patient_id + "_" + std::to_string(slice.instance_number) +
                                 "_" + stage + ".pgm"),
               m, a, b);
    }
  };
  dump("hu", hu.values, kWindowLowHu, kWindowHighHu);

  BinaryMask mask = BrainMask(hu, cfg.threshold_hu);
  if (mask.empty()) {
    warn(who + ": empty tissue mask, using the full frame");
    BinaryMask full{Matrix<std::uint8_t>(hu.height(), hu.width(), 1)};
    TensorImage t = CropAndPad(hu, full, cfg.out_side);
    dump("tensor", t.values, 0.0, 1.0);
    return t;
  }
  dump("mask", mask.bits, 0.0, 1.0);
  if (cfg.tilt_enabled) {
    TiltResult tilted = TiltCorrect(hu, mask);
    if (!tilted.mask.empty()) {
      hu = std::move(tilted.image);
      mask = std::move(tilted.mask);
      dump("tilt", hu.values, kWindowLowHu, kWindowHighHu);
    }
  }
  TensorImage t = CropAndPad(hu, mask, cfg.out_side);
  dump("tensor", t.values, 0.0, 1.0);
  return t;
}

}  // namespace skullfx::preprocess
