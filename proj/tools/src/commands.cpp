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

#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "reed/checkpoint.hpp"
#include "reed/config.hpp"
#include "reed/data.hpp"
#include "reed/error.hpp"
#include "reed/eval.hpp"
#include "reed/image_io.hpp"
#include "reed/plot.hpp"
#include "reed/report.hpp"
#include "reed/spectral.hpp"
#include "reed/trainer.hpp"

namespace fs = std::filesystem;

namespace reed::cli {
namespace {

// Options every training-style subcommand accepts.
struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string data;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Config file (flat key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config key (key=value); repeatable");
  cmd->add_option("--seed", o.seed, "Seed for every component (beats REED_SEED and the config file)");
  cmd->add_option("--data", o.data, "Image directory (default: synthetic data from the config)");
}

// Precedence: defaults < config file < REED_SEED < --seed; --set applies last.
ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (const auto env = seed_from_env()) cfg.set_seed(*env);
  if (o.seed) cfg.set_seed(*o.seed);
  for (const auto& kv : o.overrides) apply_override(cfg, kv);
  cfg.validate();
  return cfg;
}

Dataset load_images(const ExperimentConfig& cfg, const std::string& dir) {
  if (!dir.empty()) return load_dataset(dir, cfg.train.arch.image_size, cfg.train.arch.channels);
  if (cfg.data.source != "synthetic")
    return load_dataset(cfg.data.source, cfg.train.arch.image_size, cfg.train.arch.channels);
  return generate_synthetic(cfg.data.count, cfg.train.arch.image_size, cfg.data.seed, cfg.train.arch.channels);
}

DatasetSplits load_splits(const ExperimentConfig& cfg, const std::string& dir) {
  return split(load_images(cfg, dir), cfg.data.fractions, cfg.data.split_seed);
}

Dataset pick_split(const DatasetSplits& s, const Dataset& all, const std::string& which) {
  if (which == "test") return s.test;
  if (which == "val") return s.val;
  if (which == "train") return s.train;
  return all;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

TrainCallbacks progress(const std::string& stage) {
  TrainCallbacks cb;
  cb.on_epoch = [stage](const EpochRecord& e) {
    spdlog::info("{} epoch {} k={} train={:.6f} val={:.6f}", stage, e.epoch, e.k, e.train_loss, e.val_loss);
  };
  return cb;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "reed";
  for (const auto& a : args) s += " " + a;
  return s;
}

void finish_run(const fs::path& out, const ExperimentConfig& cfg, const std::string& command,
                std::uint64_t fingerprint, std::uint64_t seed, const std::string& started,
                const RunLog* log = nullptr) {
  atomic_write(out / "config.txt", to_config_text(cfg));
  RunManifest m;
  m.command = command;
  m.config_text = to_config_text(cfg);
  m.dataset_fingerprint = fingerprint;
  m.seed = seed;
  m.started_at = started;
  m.finished_at = utc_timestamp();
  if (log)
    for (const auto& e : log->epochs) m.epoch_seconds.push_back(e.wall_seconds);
  write_run_manifest(m, out / "manifest.json");
}

struct GenDataOptions {
  int count = 64;
  int size = 32;
  std::uint64_t seed = 0;
  int channels = 3;
  std::string out;
};

int cmd_gen_data(const GenDataOptions& o, std::ostream& out) {
  if (o.count < 1) throw ConfigError("--count must be >= 1");
  if (o.size < Image::kMinSide) throw ConfigError("--size must be >= 8");
  if (o.channels != 1 && o.channels != 3) throw ConfigError("--channels must be 1 or 3");
  const Dataset ds = generate_synthetic(o.count, o.size, o.seed, o.channels);
  save_dataset(ds, o.out);
  out << "wrote " << ds.size() << " images to " << o.out << " (fingerprint " << hex64(ds.fingerprint()) << ")\n";
  return kExitOk;
}

struct PretrainOptions {
  CommonOptions common;
  std::string out;
};

int cmd_pretrain(const PretrainOptions& o, const std::string& command, std::ostream& out) {
  const std::string started = utc_timestamp();
  const ExperimentConfig cfg = resolve_config(o.common);
  const DatasetSplits s = load_splits(cfg, o.common.data);
  ensure_dir(o.out);
  auto [model, log] = pretrain_vanilla(cfg.pretrain, s.train, s.val, progress("pretrain"));
  log.final_checkpoint_id = save_checkpoint(model, std::nullopt, fs::path(o.out) / "model.ckpt");
  write_runlog(log, fs::path(o.out) / "runlog.jsonl");
  finish_run(o.out, cfg, command, s.train.fingerprint(), cfg.pretrain.seed, started, &log);
  out << "final val loss " << format_sig6(log.epochs.empty() ? 0.0 : log.epochs.back().val_loss) << "\n";
  out << "checkpoint " << (fs::path(o.out) / "model.ckpt").string() << " id " << log.final_checkpoint_id << "\n";
  return kExitOk;
}

struct TrainOptions {
  CommonOptions common;
  std::string init;
  std::string out;
  std::string mode = "it-fsl-di";
  std::optional<int> k;
};

int cmd_train(const TrainOptions& o, const std::string& command, std::ostream& out) {
  const std::string started = utc_timestamp();
  ExperimentConfig cfg = resolve_config(o.common);
  const bool freeze = cfg.train.flags.freeze_encoder;
  cfg.train.flags = parse_mode(o.mode);
  cfg.train.flags.freeze_encoder = freeze;
  if (o.mode == "vanilla") cfg.train.static_k = 1;
  if (o.k) {
    if (cfg.train.flags.dynamic_incrementation)
      cfg.train.k_init = *o.k;
    else
      cfg.train.static_k = *o.k;
  }
  cfg.validate();
  const LoadedCheckpoint init = load_checkpoint(o.init);
  cfg.train.arch = init.model.arch;
  const DatasetSplits s = load_splits(cfg, o.common.data);
  ensure_dir(o.out);
  auto [model, log] = reed_train(cfg.train, init.model, s.train, s.val, progress(o.mode));
  const std::optional<CurriculumState> state =
      cfg.train.flags.dynamic_incrementation ? std::optional(log.final_curriculum) : std::nullopt;
  log.final_checkpoint_id = save_checkpoint(model, state, fs::path(o.out) / "model.ckpt");
  write_runlog(log, fs::path(o.out) / "runlog.jsonl");
  finish_run(o.out, cfg, command, s.train.fingerprint(), cfg.train.seed, started, &log);
  out << "mode " << o.mode << " epochs " << log.epochs.size() << " final k "
      << (log.epochs.empty() ? 0 : log.epochs.back().k) << " final val loss "
      << format_sig6(log.epochs.empty() ? 0.0 : log.epochs.back().val_loss) << "\n";
  return kExitOk;
}

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string checkpoints;
  std::string latent_mode;
  std::string smooth;
  std::string edit;
  std::string split = "test";
  std::string name = "model";
  int samples = 4;
  std::string out;
};

void apply_eval_flags(ExperimentConfig& cfg, const EvalOptions& o) {
  if (!o.checkpoints.empty()) cfg.eval.checkpoints = parse_int_list(o.checkpoints, "--checkpoints");
  if (!o.latent_mode.empty()) cfg.eval.latent_mode = parse_latent_mode(o.latent_mode);
  if (!o.smooth.empty()) cfg.eval.smooth_sigma = parse_smoothing(o.smooth);
  if (!o.edit.empty()) cfg.set("eval.edit", o.edit);
  cfg.eval.validate();
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  ExperimentConfig cfg = resolve_config(o.common);
  apply_eval_flags(cfg, o);
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  cfg.train.arch = ck.model.arch;
  const Dataset all = load_images(cfg, o.common.data);
  const Dataset test =
      o.split == "all" ? all : pick_split(split(all, cfg.data.fractions, cfg.data.split_seed), all, o.split);
  std::vector<TrajectorySample> samples;
  const MetricReport report = evaluate_iterative(ck.model, test, cfg.eval, o.name, &samples, o.samples);
  const fs::path dir(o.out);
  ensure_dir(dir);
  write_report(report, dir / "report.csv", ReportFormat::kCsv);
  write_report(report, dir / "report.json", ReportFormat::kJson);
  PlotInputs plots;
  plots.reports = {{o.name, report}};
  plots.trajectories = samples;
  if (!samples.empty()) {
    plots.spectra.emplace_back("sample0_input", samples.front().input);
    plots.spectra.emplace_back("sample0_iter" + std::to_string(cfg.eval.checkpoints.back()),
                               samples.front().at_checkpoints.back());
  }
  const auto files = emit_plots(plots, dir / "plots");
  out << "evaluated " << report.image_count << " images at checkpoints";
  for (int c : report.checkpoints()) out << " " << c;
  out << " (latent " << report.latent_mode << ", smoothing " << report.smoothing << "); " << files.size()
      << " plots\n";
  for (const auto& row : report.rows)
    out << "  n=" << row.checkpoint << " mse=" << format_sig6(row[Metric::kMse].mean)
        << " psnr=" << format_sig6(row[Metric::kPsnr].mean) << " ssim=" << format_sig6(row[Metric::kSsim].mean)
        << "\n";
  return kExitOk;
}

struct AblateOptions {
  CommonOptions common;
  std::string init;
  std::string variants;
  bool save_models = false;
  std::string out;
};

int cmd_ablate(const AblateOptions& o, const std::string& command, std::ostream& out) {
  const std::string started = utc_timestamp();
  const ExperimentConfig cfg = resolve_config(o.common);
  const DatasetSplits s = load_splits(cfg, o.common.data);
  const fs::path dir(o.out);
  ensure_dir(dir);

  ModelParameters init;
  if (!o.init.empty()) {
    init = load_checkpoint(o.init).model;
  } else {
    auto [model, log] = pretrain_vanilla(cfg.pretrain, s.train, s.val, progress("pretrain"));
    ensure_dir(dir / "pretrain");
    log.final_checkpoint_id = save_checkpoint(model, std::nullopt, dir / "pretrain" / "model.ckpt");
    write_runlog(log, dir / "pretrain" / "runlog.jsonl");
    init = std::move(model);
  }

  std::vector<AblationVariant> variants;
  if (o.variants.empty()) {
    variants = default_ablation_variants();
  } else {
    std::stringstream ss(o.variants);
    std::string name;
    while (std::getline(ss, name, ',')) variants.push_back(find_ablation_variant(name));
  }

  AblationOptions opts;
  opts.keep_models = o.save_models;
  std::string current;
  opts.on_variant_start = [&current](const std::string& name) {
    current = name;
    spdlog::info("ablation variant {}", name);
  };
  opts.callbacks.on_epoch = [&current](const EpochRecord& e) {
    spdlog::info("{} epoch {} k={} train={:.6f} val={:.6f}", current, e.epoch, e.k, e.train_loss, e.val_loss);
  };
  const AblationReport report = run_ablation(cfg.train, init, s, variants, cfg.eval, opts);

  NamedReports ok;
  for (const auto& v : report.variants) {
    if (!v.ok) continue;
    ok.emplace_back(v.name, v.report);
    ensure_dir(dir / "variants" / v.name);
    write_runlog(v.log, dir / "variants" / v.name / "runlog.jsonl");
    if (v.model) save_checkpoint(*v.model, std::nullopt, dir / "variants" / v.name / "model.ckpt");
  }
  write_report(report, dir / "ablation.csv", ReportFormat::kCsv);
  write_report(report, dir / "ablation.json", ReportFormat::kJson);
  if (!ok.empty()) {
    const ComparisonTable table = compare_models(ok);
    write_report(table, dir / "comparison.csv", ReportFormat::kCsv);
    write_report(table, dir / "comparison.json", ReportFormat::kJson);
    PlotInputs plots;
    plots.reports = ok;
    emit_plots(plots, dir / "plots");
  }
  finish_run(dir, cfg, command, s.train.fingerprint(), cfg.train.seed, started);

  std::size_t failed = 0;
  for (const auto& v : report.variants) {
    if (!v.ok) {
      ++failed;
      out << v.name << ": FAILED (" << v.error << ")\n";
      continue;
    }
    const auto& last = v.report.rows.back();
    out << v.name << ": mse@" << last.checkpoint << "=" << format_sig6(last[Metric::kMse].mean)
        << " ssim@" << last.checkpoint << "=" << format_sig6(last[Metric::kSsim].mean) << "\n";
  }
  return failed == report.variants.size() ? kExitFailure : kExitOk;
}

struct SpectraOptions {
  CommonOptions common;
  std::string images;
  std::string checkpoint;
  int iterations = 20;
  int limit = 8;
  double cutoff = kDefaultCutoffFraction;
  std::string out;
};

int cmd_spectra(const SpectraOptions& o, std::ostream& out) {
  if (o.images.empty() == o.checkpoint.empty())
    throw ConfigError("spectra needs exactly one of --images or --checkpoint");
  if (o.iterations < 1) throw ConfigError("--iterations must be >= 1");
  if (o.limit < 1) throw ConfigError("--limit must be >= 1");
  if (!(o.cutoff > 0 && o.cutoff < 1)) throw ConfigError("--cutoff must lie in (0, 1)");
  ExperimentConfig cfg = resolve_config(o.common);
  const fs::path dir(o.out);
  ensure_dir(dir);

  Dataset images("none", SplitTag::kAll, {Image(8, 8, 1)});
  std::optional<LoadedCheckpoint> ck;
  if (!o.images.empty()) {
    // Square-cropped and resized to arch.image_size like training data.
    images = load_dataset(o.images, cfg.train.arch.image_size, 3);
  } else {
    ck = load_checkpoint(o.checkpoint);
    cfg.train.arch = ck->model.arch;
    const Dataset all = load_images(cfg, o.common.data);
    images = o.common.data.empty() ? split(all, cfg.data.fractions, cfg.data.split_seed).test : all;
  }
  const std::size_t n = std::min<std::size_t>(images.size(), std::size_t(o.limit));

  std::string csv = "image,iteration,band,energy,hf_retention\n";
  PlotInputs plots;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = images.ids()[i];
    std::vector<std::pair<int, Image>> frames{{0, images[i]}};
    if (ck) frames.emplace_back(o.iterations, encode_decode_iterate(ck->model, images[i], o.iterations,
                                                                    LatentMode::mean()).back());
    for (const auto& [iter, im] : frames) {
      const SpectrumProfile p = magnitude_spectrum(im);
      std::string retention = "";
      if (iter > 0) retention = format_sig6(high_frequency_retention(images[i], im, o.cutoff));
      else if (high_frequency_energy(im, o.cutoff) >= 1e-12) retention = "1";
      for (std::size_t b = 0; b < p.band_energies.size(); ++b)
        csv += id + "," + std::to_string(iter) + "," + std::to_string(b) + "," + format_sig6(p.band_energies[b]) +
               "," + retention + "\n";
      plots.spectra.emplace_back(id + (iter == 0 ? "_input" : "_iter" + std::to_string(iter)), im);
    }
  }
  atomic_write(dir / "bands.csv", csv);
  const auto files = emit_plots(plots, dir);
  out << "wrote " << files.size() << " spectra and bands.csv for " << n << " images\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterative encode-decode training and evaluation for small VAEs", "reed"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a procedural image dataset as PNG files");
  gen_cmd->add_option("--count", gen.count, "Number of images")->capture_default_str();
  gen_cmd->add_option("--size", gen.size, "Image side in pixels")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--channels", gen.channels, "1 or 3")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  PretrainOptions pre;
  auto* pre_cmd = app.add_subcommand("pretrain", "Train a vanilla VAE from scratch");
  add_common(pre_cmd, pre.common);
  pre_cmd->add_option("--out", pre.out, "Output directory")->required();

  TrainOptions tr;
  auto* tr_cmd = app.add_subcommand("train", "Fine-tune a pretrained VAE decoder with iterative training");
  add_common(tr_cmd, tr.common);
  tr_cmd->add_option("--init", tr.init, "Pretrained checkpoint")->required();
  tr_cmd->add_option("--out", tr.out, "Output directory")->required();
  tr_cmd->add_option("--mode", tr.mode, "vanilla, it, it-fsl or it-fsl-di")
      ->check(CLI::IsMember({"vanilla", "it", "it-fsl", "it-fsl-di"}))
      ->capture_default_str();
  tr_cmd->add_option("--k", tr.k, "Static k (initial k with it-fsl-di)");

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Measure degradation over repeated encode-decode iterations");
  add_common(ev_cmd, ev.common);
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  ev_cmd->add_option("--checkpoints", ev.checkpoints, "Iteration counts to report, e.g. 5,15,25");
  ev_cmd->add_option("--latent-mode", ev.latent_mode, "mean or sample[:seed]");
  ev_cmd->add_option("--smooth", ev.smooth, "off or gaussian:<sigma> applied after every decode");
  ev_cmd->add_option("--edit", ev.edit, "Edit applied after every decode, e.g. mask_fill:0,0,8,8,0.5");
  ev_cmd->add_option("--split", ev.split, "Images to evaluate: test, val, train or all")
      ->check(CLI::IsMember({"test", "val", "train", "all"}))
      ->capture_default_str();
  ev_cmd->add_option("--name", ev.name, "Model label in reports")->capture_default_str();
  ev_cmd->add_option("--samples", ev.samples, "Trajectory strips to render")->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "Output directory")->required();

  AblateOptions ab;
  auto* ab_cmd = app.add_subcommand("ablate", "Run the component ablation grid from a shared initialization");
  add_common(ab_cmd, ab.common);
  ab_cmd->add_option("--init", ab.init, "Pretrained checkpoint (default: pretrain first)");
  ab_cmd->add_option("--variants", ab.variants, "Comma-separated subset of vanilla,IT_k2,IT_k5,IT_FSL_k5,IT_FSL_DI");
  ab_cmd->add_flag("--save-models", ab.save_models, "Write a checkpoint per variant");
  ab_cmd->add_option("--out", ab.out, "Output directory")->required();

  SpectraOptions sp;
  auto* sp_cmd = app.add_subcommand("spectra", "Write log-magnitude spectra and radial band energies");
  add_common(sp_cmd, sp.common);
  sp_cmd->add_option("--images", sp.images, "Directory of images to analyze");
  sp_cmd->add_option("--checkpoint", sp.checkpoint, "Model whose iterates are analyzed");
  sp_cmd->add_option("--iterations", sp.iterations, "Encode-decode iterations")->capture_default_str();
  sp_cmd->add_option("--limit", sp.limit, "Maximum number of images")->capture_default_str();
  sp_cmd->add_option("--cutoff", sp.cutoff, "High-frequency cutoff as a fraction of Nyquist")->capture_default_str();
  sp_cmd->add_option("--out", sp.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  const std::string command = join_args(args);
  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*pre_cmd) return cmd_pretrain(pre, command, out);
    if (*tr_cmd) return cmd_train(tr, command, out);
    if (*ev_cmd) return cmd_eval(ev, out);
    if (*ab_cmd) return cmd_ablate(ab, command, out);
    if (*sp_cmd) return cmd_spectra(sp, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace reed::cli
