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

// Minimal self-contained SVG output: grouped bar charts and line charts.
// Numbers are printed with two decimals so files diff cleanly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skullfx/error.hpp"

namespace skullfx::pipeline::svg {

namespace detail {

inline std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* Color(std::size_t i) {
  static const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
  return kPalette[i % 6];
}

// Smallest "nice" step (1, 2 or 5 times a power of ten) giving at most
// `ticks` intervals up to `top`.
inline double NiceStep(double top, int ticks) {
  if (!(top > 0.0)) return 1.0;
  const double raw = top / ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {}

  void Rect(double x, double y, double w, double h, const std::string& fill) {
    body_ << "<rect x=\"" << detail::Num(x) << "\" y=\"" << detail::Num(y) << "\" width=\""
          << detail::Num(w) << "\" height=\"" << detail::Num(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void Line(double x1, double y1, double x2, double y2, const std::string& stroke, double sw = 1.0) {
    body_ << "<line x1=\"" << detail::Num(x1) << "\" y1=\"" << detail::Num(y1) << "\" x2=\""
          << detail::Num(x2) << "\" y2=\"" << detail::Num(y2) << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << detail::Num(sw) << "\"/>\n";
  }
  void Polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2.00\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      body_ << (i ? " " : "") << detail::Num(pts[i].first) << ',' << detail::Num(pts[i].second);
    }
    body_ << "\"/>\n";
  }
  void Text(double x, double y, const std::string& text, const char* anchor = "start",
            int size = 12) {
    body_ << "<text x=\"" << detail::Num(x) << "\" y=\"" << detail::Num(y)
          << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" text-anchor=\"" << anchor
          << "\">" << detail::Escape(text) << "</text>\n";
  }

  std::string Render() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::Num(width_)
        << "\" height=\"" << detail::Num(height_) << "\" viewBox=\"0 0 " << detail::Num(width_) << ' '
        << detail::Num(height_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_, height_;
  std::ostringstream body_;
};

struct Series {
  std::string name;
  std::vector<double> values;
};

namespace detail {

struct Frame {
  double left = 70, right = 20, top = 40, bottom = 70;
  double width = 640, height = 400;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

// Title, y axis with ticks up to `y_top`, legend under the plot.
inline void Axes(Canvas& c, const Frame& f, const std::string& title, const std::string& y_label,
                 double y_top, double step, const std::vector<Series>& series) {
  c.Text(f.width / 2, 22, title, "middle", 15);
  c.Line(f.left, f.top, f.left, f.top + f.plot_h(), "black");
  c.Line(f.left, f.top + f.plot_h(), f.left + f.plot_w(), f.top + f.plot_h(), "black");
  for (double v = 0.0; v <= y_top * (1 + 1e-9); v += step) {
    const double y = f.top + f.plot_h() * (1.0 - v / y_top);
    c.Line(f.left - 4, y, f.left, y, "black");
    c.Line(f.left, y, f.left + f.plot_w(), y, "#dddddd", 0.5);
    c.Text(f.left - 6, y + 4, Num(v), "end", 10);
  }
  c.Text(14, f.top + f.plot_h() / 2, y_label, "middle", 11);
  double lx = f.left;
  const double ly = f.height - 16;
  for (std::size_t s = 0; s < series.size(); ++s) {
    c.Rect(lx, ly - 10, 12, 12, Color(s));
    c.Text(lx + 16, ly, series[s].name, "start", 11);
    lx += 24 + 7.0 * static_cast<double>(series[s].name.size());
  }
}

}  // namespace detail

// One group per category, one bar per series inside each group.
inline std::string BarChart(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& categories,
                            const std::vector<Series>& series) {
  for (const auto& s : series) {
    if (s.values.size() != categories.size()) {
      Fail(ErrorCode::kDimensionMismatch, "series '" + s.name + "' length");
    }
  }
  detail::Frame f;
  Canvas c(f.width, f.height);
  double max_v = 0.0;
  for (const auto& s : series) {
    for (double v : s.values) max_v = std::max(max_v, v);
  }
  const double step = detail::NiceStep(max_v, 5);
  const double top = std::max(step, std::ceil(max_v / step) * step);
  detail::Axes(c, f, title, y_label, top, step, series);
  const double group_w = f.plot_w() / std::max<std::size_t>(1, categories.size());
  const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, series.size());
  for (std::size_t g = 0; g < categories.size(); ++g) {
    const double gx = f.left + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double h = f.plot_h() * series[s].values[g] / top;
      const double x = gx + bar_w * static_cast<double>(s);
      c.Rect(x, f.top + f.plot_h() - h, bar_w, h, detail::Color(s));
      c.Text(x + bar_w / 2, f.top + f.plot_h() - h - 3, detail::Num(series[s].values[g]), "middle", 9);
    }
    c.Text(gx + group_w * 0.4, f.top + f.plot_h() + 16, categories[g], "middle", 11);
  }
  return c.Render();
}

// Series plotted against their index (1-based on the x axis).
inline std::string LineChart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series) {
  detail::Frame f;
  Canvas c(f.width, f.height);
  double max_v = 0.0;
  std::size_t max_n = 1;
  for (const auto& s : series) {
    max_n = std::max(max_n, s.values.size());
    for (double v : s.values) max_v = std::max(max_v, v);
  }
  const double step = detail::NiceStep(max_v, 5);
  const double top = std::max(step, std::ceil(max_v / step) * step);
  detail::Axes(c, f, title, y_label, top, step, series);
  auto x_of = [&](std::size_t i) {
    return f.left + f.plot_w() * (max_n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(max_n - 1));
  };
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      pts.emplace_back(x_of(i), f.top + f.plot_h() * (1.0 - series[s].values[i] / top));
    }
    c.Polyline(pts, detail::Color(s));
  }
  c.Text(x_of(0), f.top + f.plot_h() + 16, "1", "middle", 10);
  c.Text(x_of(max_n - 1), f.top + f.plot_h() + 16, std::to_string(max_n), "middle", 10);
  c.Text(f.left + f.plot_w() / 2, f.top + f.plot_h() + 32, x_label, "middle", 11);
  return c.Render();
}

inline void WriteFile(const std::filesystem::path& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << svg;
}

}  // namespace skullfx::pipeline::svg
