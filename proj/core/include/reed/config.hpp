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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reed/data.hpp"
#include "reed/eval.hpp"
#include "reed/trainer.hpp"

namespace reed {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or a directory of images
  int count = 2560;                  // synthetic image count
  std::uint64_t seed = 0;            // synthetic generation
  std::uint64_t split_seed = 0;
  SplitFractions fractions;

  bool operator==(const DataConfig&) const = default;
};

// Everything one experiment needs. Config files are flat key=value text:
//
//   # comment
//   seed = 3
//   arch.image_size = 32
//   train.epochs = 40
//   loss.alpha = 0.01
//
// arch.* applies to both the pretraining and the REED stage, loss.* to the
// REED stage, and a bare `seed` reseeds every component.
struct ExperimentConfig {
  DataConfig data;
  TrainConfig pretrain = vanilla_pretrain_config();
  TrainConfig train;
  EvalConfig eval;

  // Throws ConfigError naming the key on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void set_seed(std::uint64_t seed);
  void validate() const;
  KeyValues key_values() const;
};

KeyValues to_key_values(const TrainConfig& config);

// Applies every line of a config text in order.
void apply_config_text(ExperimentConfig& config, const std::string& text, const std::string& origin = "<text>");
ExperimentConfig load_config(const std::filesystem::path& path);
// "key=value".
void apply_override(ExperimentConfig& config, const std::string& assignment);
std::string to_config_text(const ExperimentConfig& config);

// REED_SEED, when set; malformed values throw ConfigError.
std::optional<std::uint64_t> seed_from_env();

// Value parsers shared with the command line.
std::vector<int> parse_int_list(const std::string& text, const std::string& what);
LatentMode parse_latent_mode(const std::string& text);
inline constexpr double kDefaultSmoothingSigma = 0.8;
// "off", "gaussian" (sigma 0.8), "gaussian:<sigma>" or a bare sigma.
double parse_smoothing(const std::string& text);
// vanilla | it | it-fsl | it-fsl-di
ModeFlags parse_mode(const std::string& text);
std::string mode_name(const ModeFlags& flags);

}  // namespace reed
