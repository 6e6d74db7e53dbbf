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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reed/data.hpp"
#include "reed/trainer.hpp"
#include "reed/vae.hpp"

namespace reed {

enum class Metric { kMse, kPsnr, kSsim, kPerceptual, kFrechet };
inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::kMse, Metric::kPsnr, Metric::kSsim, Metric::kPerceptual,
                                                      Metric::kFrechet};
std::string to_string(Metric m);
Metric parse_metric(const std::string& name);
bool higher_is_better(Metric m);

// Pixel-space edits applied between encode-decode iterations.
struct EditSpec {
  enum class Kind { kIdentity, kMaskFill, kColorShift, kBlur };
  Kind kind = Kind::kIdentity;
  int x = 0, y = 0, width = 0, height = 0;  // mask rectangle
  double value = 0.0;                       // fill value, shift delta or blur sigma

  static EditSpec identity() { return {}; }
  static EditSpec mask_fill(int x, int y, int w, int h, double value);
  static EditSpec color_shift(double delta);
  static EditSpec blur(double sigma);
  // "identity", "mask_fill:x,y,w,h,value", "color_shift:delta", "blur:sigma".
  static EditSpec parse(const std::string& text);
  std::string str() const;
};

// Deterministic transform, output clamped to [0,1]. Throws SpecError when
// the mask rectangle leaves the image.
Image apply_edit_hook(const Image& image, const EditSpec& spec);

struct EvalConfig {
  std::vector<int> checkpoints{5, 15, 25};
  LatentMode latent_mode = LatentMode::mean();
  double smooth_sigma = 0.0;  // Gaussian smoothing after every decode when > 0
  std::optional<EditSpec> edit_hook;
  int batch_size = 64;

  void validate() const;
  // "mean" or "sample:<seed>" / "off" or "gaussian:<sigma>".
  std::string smoothing_label() const;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

struct CheckpointMetrics {
  int checkpoint = 0;
  std::array<MetricStats, kAllMetrics.size()> stats{};

  MetricStats& operator[](Metric m) { return stats[std::size_t(m)]; }
  const MetricStats& operator[](Metric m) const { return stats[std::size_t(m)]; }
};

struct MetricReport {
  std::string model;
  std::string latent_mode = "mean";
  std::string smoothing = "off";
  std::string notes;
  int image_count = 0;
  std::vector<CheckpointMetrics> rows;  // one per checkpoint, increasing

  std::vector<int> checkpoints() const;
  const CheckpointMetrics& at_checkpoint(int n) const;
};

// x^0 and the iterates at each checkpoint for a few test images.
struct TrajectorySample {
  Image input;
  std::vector<Image> at_checkpoints;
};

// Runs every test image to max(checkpoints) iterations and scores x^n
// against x^0 at each checkpoint. Frechet distance compares the set of all
// x^n with the set of all x^0.
MetricReport evaluate_iterative(const Codec& codec, const Dataset& test_set, const EvalConfig& cfg,
                                const std::string& model_name = "model",
                                std::vector<TrajectorySample>* samples = nullptr, int sample_count = 4);
MetricReport evaluate_iterative(const ModelParameters& model, const Dataset& test_set, const EvalConfig& cfg,
                                const std::string& model_name = "model",
                                std::vector<TrajectorySample>* samples = nullptr, int sample_count = 4);

// Table-style grid of variant x checkpoint x metric.
struct AblationVariant {
  std::string name;
  ModeFlags flags;
  int static_k = 1;
};

// vanilla, IT_k2, IT_k5, IT_FSL_k5, IT_FSL_DI in that order.
std::vector<AblationVariant> default_ablation_variants();
AblationVariant find_ablation_variant(const std::string& name);
TrainConfig apply_variant(const TrainConfig& base, const AblationVariant& v);

struct VariantResult {
  std::string name;
  bool ok = false;
  std::string error;
  std::uint64_t init_checksum = 0;
  RunLog log;
  MetricReport report;
  std::optional<ModelParameters> model;
};

struct AblationReport {
  std::vector<VariantResult> variants;
  EvalConfig eval;
};

struct AblationOptions {
  bool keep_models = false;
  TrainCallbacks callbacks;
  std::function<void(const std::string&)> on_variant_start;
};

// Trains every variant from the same initialization and seed and evaluates
// it. A variant that diverges is recorded as failed; the rest still run.
AblationReport run_ablation(const TrainConfig& base_config, const ModelParameters& init, const DatasetSplits& splits,
                            const std::vector<AblationVariant>& variants, const EvalConfig& eval_cfg,
                            const AblationOptions& options = {});

struct ComparisonCell {
  double value = 0.0;
  double ratio = 1.0;  // value / baseline value
  bool best = false;
  bool tie = false;
};

// cells[metric][checkpoint index][model index]
struct ComparisonTable {
  std::vector<std::string> models;
  std::vector<int> checkpoints;
  std::array<std::vector<std::vector<ComparisonCell>>, kAllMetrics.size()> cells;

  const ComparisonCell& cell(Metric m, std::size_t checkpoint_index, std::size_t model_index) const {
    return cells[std::size_t(m)][checkpoint_index][model_index];
  }
};

// Side-by-side means with the best model per (metric, checkpoint) flagged
// and ratios against the first report. With a single report nothing is
// flagged. Throws ReportError if checkpoint lists differ.
ComparisonTable compare_models(const std::vector<std::pair<std::string, MetricReport>>& reports);

// Order-sensitive FNV-1a hash over all parameter bytes.
std::uint64_t parameter_checksum(const ModelParameters& model);

}  // namespace reed
