// Copyright 2026 The REED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reed/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

#include "reed/error.hpp"
#include "reed/image_io.hpp"
#include "reed/spectral.hpp"

namespace reed {
namespace {

// 3x5 glyphs, one row per entry, bit 2 = leftmost column.
struct Glyph {
  char c;
  std::array<unsigned char, 5> rows;
};

constexpr Glyph kFont[] = {
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
    {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
    {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'.', {0, 0, 0, 0, 2}}, {'-', {0, 0, 7, 0, 0}},
    {'+', {0, 2, 7, 2, 0}}, {'e', {0, 7, 7, 4, 7}},
};

using Rgb = std::array<float, 3>;

constexpr Rgb kPalette[] = {{0.12f, 0.47f, 0.71f}, {1.0f, 0.50f, 0.05f}, {0.17f, 0.63f, 0.17f},
                            {0.84f, 0.15f, 0.16f}, {0.58f, 0.40f, 0.74f}, {0.55f, 0.34f, 0.29f},
                            {0.89f, 0.47f, 0.76f}, {0.50f, 0.50f, 0.50f}};

void set_px(Image& im, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= im.width() || y >= im.height()) return;
  for (int ch = 0; ch < 3; ++ch) im.at(ch, y, x) = c[ch];
}

void draw_line(Image& im, int x0, int y0, int x1, int y1, const Rgb& c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set_px(im, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void fill_rect(Image& im, int x, int y, int w, int h, const Rgb& c) {
  for (int j = y; j < y + h; ++j)
    for (int i = x; i < x + w; ++i) set_px(im, i, j, c);
}

int text_width(const std::string& s) { return int(s.size()) * 4 - 1; }

void draw_text(Image& im, int x, int y, const std::string& s, const Rgb& c) {
  for (char ch : s) {
    for (const auto& g : kFont) {
      if (g.c != ch) continue;
      for (int r = 0; r < 5; ++r)
        for (int b = 0; b < 3; ++b)
          if (g.rows[r] & (4 >> b)) set_px(im, x + b, y + r, c);
    }
    x += 4;
  }
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out.empty() ? "unnamed" : out;
}

}  // namespace

LinePlot metric_plot(const NamedReports& reports, Metric metric) {
  LinePlot p;
  p.title = to_string(metric);
  if (reports.empty()) return p;
  p.x_ticks = reports.front().second.checkpoints();
  for (const auto& [name, r] : reports) {
    if (r.checkpoints() != p.x_ticks) throw ReportError("report '" + name + "' has different checkpoints");
    PlotSeries s{name, {}};
    for (const auto& row : r.rows) s.y.push_back(row[metric].mean);
    p.series.push_back(std::move(s));
  }
  return p;
}

Image render_line_plot(const LinePlot& plot, int width, int height) {
  Image im(height, width, 3, 1.0f);
  const Rgb black{0, 0, 0}, grey{0.85f, 0.85f, 0.85f};
  const int left = 44, right = width - 10, top = 14, bottom = height - 20;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : plot.series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5 * std::max(1e-6, std::abs(lo));
    hi += 0.5 * std::max(1e-6, std::abs(hi));
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  int xmin = 0, xmax = 1;
  if (!plot.x_ticks.empty()) {
    xmin = plot.x_ticks.front();
    xmax = plot.x_ticks.back();
    if (xmax == xmin) xmin -= 1, xmax += 1;
  }
  auto px = [&](double x) { return left + int(std::lround((x - xmin) / double(xmax - xmin) * (right - left))); };
  auto py = [&](double y) { return bottom - int(std::lround((y - lo) / (hi - lo) * (bottom - top))); };

  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    draw_line(im, left, py(v), right, py(v), grey);
    const std::string l = label(v);
    draw_text(im, left - 3 - text_width(l), py(v) - 2, l, black);
  }
  draw_line(im, left, top, left, bottom, black);
  draw_line(im, left, bottom, right, bottom, black);
  for (int x : plot.x_ticks) {
    draw_line(im, px(x), bottom, px(x), bottom + 3, black);
    const std::string l = std::to_string(x);
    draw_text(im, px(x) - text_width(l) / 2, bottom + 6, l, black);
  }

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const Rgb& c = kPalette[i % std::size(kPalette)];
    const auto& s = plot.series[i];
    int prev_x = 0, prev_y = 0;
    bool have_prev = false;
    for (std::size_t j = 0; j < s.y.size() && j < plot.x_ticks.size(); ++j) {
      if (!std::isfinite(s.y[j])) {
        have_prev = false;
        continue;
      }
      const int x = px(plot.x_ticks[j]), y = py(s.y[j]);
      if (have_prev) draw_line(im, prev_x, prev_y, x, y, c);
      fill_rect(im, x - 1, y - 1, 3, 3, c);
      prev_x = x, prev_y = y, have_prev = true;
    }
    fill_rect(im, right - 8 - int(i) * 10, 3, 7, 7, c);
  }
  return im;
}

Image trajectory_strip(const TrajectorySample& sample) {
  const Image& in = sample.input;
  const int tiles = 1 + int(sample.at_checkpoints.size());
  Image out(in.height(), in.width() * tiles, in.channels(), 0.0f);
  auto blit = [&](const Image& tile, int t) {
    if (!tile.same_shape(in)) throw ShapeError("trajectory tiles must share the input shape");
    for (int c = 0; c < in.channels(); ++c)
      for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) out.at(c, y, t * in.width() + x) = tile.at(c, y, x);
  };
  blit(in, 0);
  for (int t = 1; t < tiles; ++t) blit(sample.at_checkpoints[std::size_t(t - 1)], t);
  return out;
}

std::vector<std::filesystem::path> emit_plots(const PlotInputs& inputs, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir)) throw IoError("cannot create plot directory " + out_dir.string());
  std::vector<std::filesystem::path> files;
  auto emit = [&](const Image& im, const std::string& name) {
    const auto path = out_dir / name;
    write_png(im, path);
    files.push_back(path);
  };
  if (!inputs.reports.empty())
    for (Metric m : kAllMetrics) emit(render_line_plot(metric_plot(inputs.reports, m)), "metric_" + to_string(m) + ".png");
  for (std::size_t i = 0; i < inputs.trajectories.size(); ++i)
    emit(trajectory_strip(inputs.trajectories[i]), "trajectory_" + std::to_string(i) + ".png");
  for (const auto& [name, image] : inputs.spectra)
    emit(spectrum_heatmap(magnitude_spectrum(image)), "spectrum_" + slug(name) + ".png");
  return files;
}

}  // namespace reed
