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

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "reed/eval.hpp"
#include "reed/image.hpp"

namespace reed {

struct PlotSeries {
  std::string name;
  std::vector<double> y;  // one value per x tick
};

struct LinePlot {
  std::string title;
  std::vector<int> x_ticks;
  std::vector<PlotSeries> series;
};

using NamedReports = std::vector<std::pair<std::string, MetricReport>>;

// Metric mean against the report checkpoints, one series per model.
LinePlot metric_plot(const NamedReports& reports, Metric metric);

// RGB raster with axes, numeric tick labels and one colored polyline per
// series (legend swatches follow series order).
Image render_line_plot(const LinePlot& plot, int width = 320, int height = 220);

// Input followed by every checkpoint iterate, side by side.
Image trajectory_strip(const TrajectorySample& sample);

struct PlotInputs {
  NamedReports reports;
  std::vector<TrajectorySample> trajectories;
  std::vector<std::pair<std::string, Image>> spectra;  // name, source image
};

// Writes metric_<metric>.png, trajectory_<i>.png and spectrum_<name>.png.
// Returns the written paths in a fixed order.
std::vector<std::filesystem::path> emit_plots(const PlotInputs& inputs, const std::filesystem::path& out_dir);

}  // namespace reed
