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

#include "reed/eval.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reed/losses.hpp"
#include "reed/metrics.hpp"

namespace reed {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kMse: return "mse";
    case Metric::kPsnr: return "psnr";
    case Metric::kSsim: return "ssim";
    case Metric::kPerceptual: return "perceptual";
    case Metric::kFrechet: return "frechet";
  }
  return "mse";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : kAllMetrics)
    if (to_string(m) == name) return m;
  throw ReportError("unknown metric '" + name + "'");
}

bool higher_is_better(Metric m) { return m == Metric::kPsnr || m == Metric::kSsim; }

EditSpec EditSpec::mask_fill(int x, int y, int w, int h, double value) {
  EditSpec s;
  s.kind = Kind::kMaskFill;
  s.x = x;
  s.y = y;
  s.width = w;
  s.height = h;
  s.value = value;
  return s;
}

EditSpec EditSpec::color_shift(double delta) {
  EditSpec s;
  s.kind = Kind::kColorShift;
  s.value = delta;
  return s;
}

EditSpec EditSpec::blur(double sigma) {
  EditSpec s;
  s.kind = Kind::kBlur;
  s.value = sigma;
  return s;
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw SpecError("malformed number '" + tok + "' in " + what);
    }
  }
  return out;
}

}  // namespace

EditSpec EditSpec::parse(const std::string& text) {
  if (text == "identity" || text == "none") return identity();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw SpecError("unknown edit spec '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const auto nums = parse_numbers(text.substr(colon + 1), "edit '" + text + "'");
  if (kind == "mask_fill" && nums.size() == 5)
    return mask_fill(int(nums[0]), int(nums[1]), int(nums[2]), int(nums[3]), nums[4]);
  if (kind == "color_shift" && nums.size() == 1) return color_shift(nums[0]);
  if (kind == "blur" && nums.size() == 1) {
    if (nums[0] < 0) throw SpecError("blur sigma must be >= 0");
    return blur(nums[0]);
  }
  throw SpecError("unknown edit spec '" + text + "'");
}

std::string EditSpec::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kIdentity: os << "identity"; break;
    case Kind::kMaskFill: os << "mask_fill:" << x << "," << y << "," << width << "," << height << "," << value; break;
    case Kind::kColorShift: os << "color_shift:" << value; break;
    case Kind::kBlur: os << "blur:" << value; break;
  }
  return os.str();
}

Image apply_edit_hook(const Image& image, const EditSpec& spec) {
  Image out = image;
  switch (spec.kind) {
    case EditSpec::Kind::kIdentity: return out;
    case EditSpec::Kind::kMaskFill: {
      if (spec.x < 0 || spec.y < 0 || spec.width < 1 || spec.height < 1 || spec.x + spec.width > image.width() ||
          spec.y + spec.height > image.height())
        throw SpecError("mask rectangle " + spec.str() + " is outside the image");
      const float v = float(std::clamp(spec.value, 0.0, 1.0));
      for (int c = 0; c < image.channels(); ++c)
        for (int y = spec.y; y < spec.y + spec.height; ++y)
          for (int x = spec.x; x < spec.x + spec.width; ++x) out.at(c, y, x) = v;
      break;
    }
    case EditSpec::Kind::kColorShift:
      for (auto& v : out.pixels()) v = float(double(v) + spec.value);
      break;
    case EditSpec::Kind::kBlur: out = gaussian_blur(image, spec.value); break;
  }
  out.clamp01();
  return out;
}

void EvalConfig::validate() const {
  if (checkpoints.empty()) throw ConfigError("eval checkpoints must not be empty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1) throw ConfigError("eval checkpoints must be >= 1");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) throw ConfigError("eval checkpoints must be strictly increasing");
  }
  if (smooth_sigma < 0) throw ConfigError("smoothing sigma must be >= 0");
  if (batch_size < 1) throw ConfigError("eval batch size must be >= 1");
}

std::string EvalConfig::smoothing_label() const {
  if (smooth_sigma <= 0) return "off";
  std::ostringstream os;
  os << "gaussian:" << smooth_sigma;
  return os.str();
}

std::vector<int> MetricReport::checkpoints() const {
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(r.checkpoint);
  return out;
}

const CheckpointMetrics& MetricReport::at_checkpoint(int n) const {
  for (const auto& r : rows)
    if (r.checkpoint == n) return r;
  throw ReportError("report has no checkpoint " + std::to_string(n));
}

namespace {

MetricStats summarize(const std::vector<double>& v) {
  MetricStats s;
  if (v.empty()) return s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / double(v.size());
  double var = 0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / double(v.size()));
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  // Summation rounding can push the mean of identical values past them.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

MetricStats scalar_stats(double v) { return {v, 0.0, v, v}; }

}  // namespace

MetricReport evaluate_iterative(const Codec& codec, const Dataset& test_set, const EvalConfig& cfg,
                                const std::string& model_name, std::vector<TrajectorySample>* samples,
                                int sample_count) {
  cfg.validate();
  const std::size_t nck = cfg.checkpoints.size();
  const int max_n = cfg.checkpoints.back();
  std::vector<std::array<std::vector<double>, 4>> per_image(nck);
  std::vector<std::vector<Image>> iterates(nck);
  if (samples) samples->clear();

  IterateHook hook;
  if (cfg.smooth_sigma > 0 || cfg.edit_hook) {
    hook = [&cfg](Tensor& x, int) {
      for (int n = 0; n < x.n(); ++n) {
        Image im = unstack(x, n);
        if (cfg.smooth_sigma > 0) im = gaussian_blur(im, cfg.smooth_sigma);
        if (cfg.edit_hook) im = apply_edit_hook(im, *cfg.edit_hook);
        std::copy(im.values().begin(), im.values().end(), x.item(n).begin());
      }
    };
  }

  const auto batches = epoch_batches(test_set.size(), cfg.batch_size, false, 0, 0);
  for (const auto& idx : batches) {
    std::vector<Image> inputs;
    for (auto i : idx) inputs.push_back(test_set[i]);
    const Tensor x0 = stack(inputs);
    iterate_batch(
        codec, x0, max_n, cfg.latent_mode,
        [&](const Tensor& x, int it) {
          const auto pos = std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), it);
          if (pos == cfg.checkpoints.end()) return;
          const std::size_t c = std::size_t(pos - cfg.checkpoints.begin());
          for (int n = 0; n < x.n(); ++n) {
            Image xn = unstack(x, n);
            const Image& ref = inputs[n];
            const double m = mse(ref, xn);
            per_image[c][0].push_back(m);
            per_image[c][1].push_back(psnr_from_mse(m));
            per_image[c][2].push_back(ssim(ref, xn));
            per_image[c][3].push_back(perceptual_distance(ref, xn));
            const std::size_t global = idx[n];
            if (samples && global < std::size_t(sample_count)) {
              if (samples->size() <= global) samples->resize(global + 1);
              auto& s = (*samples)[global];
              if (s.at_checkpoints.empty()) s.input = ref;
              s.at_checkpoints.push_back(xn);
            }
            iterates[c].push_back(std::move(xn));
          }
        },
        hook);
  }

  MetricReport report;
  report.model = model_name;
  report.latent_mode = cfg.latent_mode.str();
  report.smoothing = cfg.smoothing_label();
  report.image_count = int(test_set.size());
  report.notes =
      "metrics against x^0; perceptual = multi-scale gradient distance, frechet = Frechet distance of fixed "
      "random-conv features; absolute scales are not comparable to LPIPS/FID, only orderings and ratios";
  if (cfg.edit_hook) report.notes += "; edit hook " + cfg.edit_hook->str();
  const bool frechet_defined = test_set.size() >= 2;
  if (!frechet_defined) report.notes += "; frechet undefined for fewer than 2 images (reported as 0)";
  for (std::size_t c = 0; c < nck; ++c) {
    CheckpointMetrics row;
    row.checkpoint = cfg.checkpoints[c];
    row[Metric::kMse] = summarize(per_image[c][0]);
    row[Metric::kPsnr] = summarize(per_image[c][1]);
    row[Metric::kSsim] = summarize(per_image[c][2]);
    row[Metric::kPerceptual] = summarize(per_image[c][3]);
    row[Metric::kFrechet] =
        scalar_stats(frechet_defined ? frechet_feature_distance(iterates[c], test_set.items()) : 0.0);
    report.rows.push_back(row);
  }
  return report;
}

MetricReport evaluate_iterative(const ModelParameters& model, const Dataset& test_set, const EvalConfig& cfg,
                                const std::string& model_name, std::vector<TrajectorySample>* samples,
                                int sample_count) {
  return evaluate_iterative(VaeCodec(model), test_set, cfg, model_name, samples, sample_count);
}

std::vector<AblationVariant> default_ablation_variants() {
  return {
      {"vanilla", ModeFlags{false, false, false, true}, 1},
      {"IT_k2", ModeFlags{true, false, false, true}, 2},
      {"IT_k5", ModeFlags{true, false, false, true}, 5},
      {"IT_FSL_k5", ModeFlags{true, true, false, true}, 5},
      {"IT_FSL_DI", ModeFlags{true, true, true, true}, 5},
  };
}

AblationVariant find_ablation_variant(const std::string& name) {
  for (const auto& v : default_ablation_variants())
    if (v.name == name) return v;
  throw ConfigError("unknown ablation variant '" + name + "'");
}

TrainConfig apply_variant(const TrainConfig& base, const AblationVariant& v) {
  TrainConfig c = base;
  c.flags = v.flags;
  c.static_k = v.static_k;
  return c;
}

std::uint64_t parameter_checksum(const ModelParameters& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const ParamSet<float>& ps) {
    for (const auto& p : ps) {
      const auto* b = reinterpret_cast<const unsigned char*>(p.value.data());
      for (std::size_t i = 0; i < p.value.size() * sizeof(float); ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
      }
    }
  };
  feed(model.encoder);
  feed(model.decoder);
  return h;
}

AblationReport run_ablation(const TrainConfig& base_config, const ModelParameters& init, const DatasetSplits& splits,
                            const std::vector<AblationVariant>& variants, const EvalConfig& eval_cfg,
                            const AblationOptions& options) {
  if (variants.empty()) throw ConfigError("ablation needs at least one variant");
  eval_cfg.validate();
  AblationReport out;
  out.eval = eval_cfg;
  for (const auto& v : variants) {
    VariantResult r;
    r.name = v.name;
    const ModelParameters start = init;
    r.init_checksum = parameter_checksum(start);
    if (options.on_variant_start) options.on_variant_start(v.name);
    try {
      auto [model, log] = reed_train(apply_variant(base_config, v), start, splits.train, splits.val, options.callbacks);
      r.report = evaluate_iterative(model, splits.test, eval_cfg, v.name);
      r.log = std::move(log);
      r.ok = true;
      if (options.keep_models) r.model = std::move(model);
    } catch (const Error& e) {
      spdlog::error("ablation variant {} failed: {}", v.name, e.what());
      r.error = e.what();
    }
    out.variants.push_back(std::move(r));
  }
  return out;
}

ComparisonTable compare_models(const std::vector<std::pair<std::string, MetricReport>>& reports) {
  ComparisonTable t;
  if (reports.empty()) return t;
  t.checkpoints = reports.front().second.checkpoints();
  for (const auto& [name, rep] : reports) {
    if (rep.checkpoints() != t.checkpoints) throw ReportError("report '" + name + "' has different checkpoints");
    t.models.push_back(name);
  }
  const std::size_t nm = reports.size();
  for (Metric m : kAllMetrics) {
    auto& grid = t.cells[std::size_t(m)];
    grid.assign(t.checkpoints.size(), std::vector<ComparisonCell>(nm));
    for (std::size_t c = 0; c < t.checkpoints.size(); ++c) {
      const double base = reports.front().second.rows[c][m].mean;
      for (std::size_t i = 0; i < nm; ++i) {
        auto& cell = grid[c][i];
        cell.value = reports[i].second.rows[c][m].mean;
        if (base != 0.0)
          cell.ratio = cell.value / base;
        else
          cell.ratio = cell.value == 0.0 ? 1.0 : std::copysign(INFINITY, cell.value);
      }
      if (nm < 2) continue;
      double best = grid[c][0].value;
      for (std::size_t i = 1; i < nm; ++i)
        best = higher_is_better(m) ? std::max(best, grid[c][i].value) : std::min(best, grid[c][i].value);
      std::size_t winners = 0;
      const double tol = 1e-12 * std::max(1.0, std::abs(best));
      for (auto& cell : grid[c])
        if (std::abs(cell.value - best) <= tol) {
          cell.best = true;
          ++winners;
        }
      if (winners > 1)
        for (auto& cell : grid[c]) cell.tie = cell.best;
    }
  }
  return t;
}

}  // namespace reed
