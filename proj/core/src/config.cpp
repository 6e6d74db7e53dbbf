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

#include "reed/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace reed {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& value) { return parse_number<int>(key, value); }
double parse_double(const std::string& key, const std::string& value) { return parse_number<double>(key, value); }
std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  return parse_number<std::uint64_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

void set_arch(ArchConfig& a, const std::string& field, const std::string& key, const std::string& value) {
  if (field == "image_size") a.image_size = parse_int(key, value);
  else if (field == "channels") a.channels = parse_int(key, value);
  else if (field == "latent_channels") a.latent_channels = parse_int(key, value);
  else if (field == "conv_widths") a.conv_widths = parse_int_list(value, key);
  else if (field == "nonlinearity") {
    parse_nonlinearity(trim(value));
    a.nonlinearity = trim(value);
  } else if (field == "refine_convs") a.refine_convs = parse_int(key, value);
  else if (field == "seed") a.seed = parse_u64(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void set_loss(LossWeights& w, const std::string& field, const std::string& key, const std::string& value) {
  if (field == "alpha") w.alpha = parse_double(key, value);
  else if (field == "beta") w.beta = parse_double(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void set_train(TrainConfig& c, const std::string& field, const std::string& key, const std::string& value) {
  if (field == "epochs") c.epochs_max = parse_int(key, value);
  else if (field == "k_init") c.k_init = parse_int(key, value);
  else if (field == "k_max") c.k_max = parse_int(key, value);
  else if (field == "patience") c.plateau_patience = parse_int(key, value);
  else if (field == "tolerance") c.plateau_tolerance = parse_double(key, value);
  else if (field == "k") c.static_k = parse_int(key, value);
  else if (field == "lr") c.learning_rate = parse_double(key, value);
  else if (field == "beta1") c.adam_beta1 = parse_double(key, value);
  else if (field == "batch_size") c.batch_size = parse_int(key, value);
  else if (field == "seed") c.seed = parse_u64(key, value);
  else if (field == "alpha" || field == "beta") set_loss(c.weights, field, key, value);
  else if (field == "mode") {
    const bool freeze = c.flags.freeze_encoder;
    c.flags = parse_mode(trim(value));
    c.flags.freeze_encoder = freeze;
  } else if (field == "iterative_training") c.flags.iterative_training = parse_bool(key, value);
  else if (field == "first_step_loss") c.flags.first_step_loss = parse_bool(key, value);
  else if (field == "dynamic_incrementation") c.flags.dynamic_incrementation = parse_bool(key, value);
  else if (field == "freeze_encoder") c.flags.freeze_encoder = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void prefixed(KeyValues& out, const std::string& prefix, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out.emplace_back(prefix + k, v);
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_int(what, tok));
  if (out.empty()) throw ConfigError("empty list for '" + what + "'");
  return out;
}

LatentMode parse_latent_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "mean") return LatentMode::mean();
  if (t == "sample") return LatentMode::sample(0);
  if (t.rfind("sample:", 0) == 0) return LatentMode::sample(parse_u64("latent_mode", t.substr(7)));
  throw ConfigError("invalid latent mode '" + text + "' (expected mean or sample[:seed])");
}

double parse_smoothing(const std::string& text) {
  const std::string t = trim(text);
  if (t == "off" || t == "none") return 0.0;
  if (t == "gaussian") return kDefaultSmoothingSigma;
  const std::string num = t.rfind("gaussian:", 0) == 0 ? t.substr(9) : t;
  const double sigma = parse_double("smooth", num);
  if (sigma < 0) throw ConfigError("smoothing sigma must be >= 0");
  return sigma;
}

ModeFlags parse_mode(const std::string& text) {
  if (text == "vanilla") return {false, false, false, true};
  if (text == "it") return {true, false, false, true};
  if (text == "it-fsl") return {true, true, false, true};
  if (text == "it-fsl-di") return {true, true, true, true};
  throw ConfigError("unknown training mode '" + text + "' (expected vanilla, it, it-fsl or it-fsl-di)");
}

std::string mode_name(const ModeFlags& f) {
  if (!f.iterative_training) return "vanilla";
  std::string s = "it";
  if (f.first_step_loss) s += "-fsl";
  if (f.dynamic_incrementation) s += "-di";
  return s;
}

KeyValues to_key_values(const TrainConfig& c) {
  return {
      {"arch.image_size", std::to_string(c.arch.image_size)},
      {"arch.channels", std::to_string(c.arch.channels)},
      {"arch.latent_channels", std::to_string(c.arch.latent_channels)},
      {"arch.conv_widths", join_ints(c.arch.conv_widths)},
      {"arch.nonlinearity", c.arch.nonlinearity},
      {"arch.refine_convs", std::to_string(c.arch.refine_convs)},
      {"arch.seed", std::to_string(c.arch.seed)},
      {"epochs", std::to_string(c.epochs_max)},
      {"k_init", std::to_string(c.k_init)},
      {"k_max", std::to_string(c.k_max)},
      {"patience", std::to_string(c.plateau_patience)},
      {"tolerance", fmt_double(c.plateau_tolerance)},
      {"k", std::to_string(c.static_k)},
      {"alpha", fmt_double(c.weights.alpha)},
      {"beta", fmt_double(c.weights.beta)},
      {"lr", fmt_double(c.learning_rate)},
      {"beta1", fmt_double(c.adam_beta1)},
      {"batch_size", std::to_string(c.batch_size)},
      {"seed", std::to_string(c.seed)},
      {"iterative_training", fmt_bool(c.flags.iterative_training)},
      {"first_step_loss", fmt_bool(c.flags.first_step_loss)},
      {"dynamic_incrementation", fmt_bool(c.flags.dynamic_incrementation)},
      {"freeze_encoder", fmt_bool(c.flags.freeze_encoder)},
  };
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  if (key == "seed") {
    set_seed(parse_u64(key, value));
    return;
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("unknown config key '" + key + "'");
  const std::string section = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  if (section == "arch") {
    set_arch(pretrain.arch, field, key, value);
    set_arch(train.arch, field, key, value);
  } else if (section == "loss") {
    set_loss(train.weights, field, key, value);
  } else if (section == "train") {
    if (field.rfind("arch.", 0) == 0) set_arch(train.arch, field.substr(5), key, value);
    else set_train(train, field, key, value);
  } else if (section == "pretrain") {
    if (field.rfind("arch.", 0) == 0) set_arch(pretrain.arch, field.substr(5), key, value);
    else set_train(pretrain, field, key, value);
  } else if (section == "data") {
    if (field == "source") data.source = trim(value);
    else if (field == "count") data.count = parse_int(key, value);
    else if (field == "seed") data.seed = parse_u64(key, value);
    else if (field == "split_seed") data.split_seed = parse_u64(key, value);
    else if (field == "train_fraction") data.fractions.train = parse_double(key, value);
    else if (field == "val_fraction") data.fractions.val = parse_double(key, value);
    else if (field == "test_fraction") data.fractions.test = parse_double(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  } else if (section == "eval") {
    if (field == "checkpoints") eval.checkpoints = parse_int_list(value, key);
    else if (field == "latent_mode") eval.latent_mode = parse_latent_mode(value);
    else if (field == "smooth") eval.smooth_sigma = parse_smoothing(value);
    else if (field == "batch_size") eval.batch_size = parse_int(key, value);
    else if (field == "edit") {
      try {
        const EditSpec e = EditSpec::parse(trim(value));
        if (e.kind == EditSpec::Kind::kIdentity) eval.edit_hook.reset();
        else eval.edit_hook = e;
      } catch (const SpecError& err) {
        throw ConfigError("invalid value for key '" + key + "': " + err.what());
      }
    } else throw ConfigError("unknown config key '" + key + "'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::set_seed(std::uint64_t seed) {
  data.seed = seed;
  data.split_seed = seed;
  pretrain.seed = seed;
  pretrain.arch.seed = seed;
  train.seed = seed;
  train.arch.seed = seed;
}

void ExperimentConfig::validate() const {
  if (data.count < 3) throw ConfigError("data.count must be >= 3");
  if (data.source.empty()) throw ConfigError("data.source must not be empty");
  pretrain.validate();
  train.validate();
  if (pretrain.arch.image_size != train.arch.image_size || pretrain.arch.channels != train.arch.channels ||
      pretrain.arch.latent_channels != train.arch.latent_channels ||
      pretrain.arch.conv_widths != train.arch.conv_widths || pretrain.arch.nonlinearity != train.arch.nonlinearity ||
      pretrain.arch.refine_convs != train.arch.refine_convs)
    throw ConfigError("pretrain and train architectures differ");
  eval.validate();
}

KeyValues ExperimentConfig::key_values() const {
  KeyValues out = {
      {"data.source", data.source},
      {"data.count", std::to_string(data.count)},
      {"data.seed", std::to_string(data.seed)},
      {"data.split_seed", std::to_string(data.split_seed)},
      {"data.train_fraction", fmt_double(data.fractions.train)},
      {"data.val_fraction", fmt_double(data.fractions.val)},
      {"data.test_fraction", fmt_double(data.fractions.test)},
  };
  prefixed(out, "pretrain.", to_key_values(pretrain));
  prefixed(out, "train.", to_key_values(train));
  out.emplace_back("eval.checkpoints", join_ints(eval.checkpoints));
  out.emplace_back("eval.latent_mode", eval.latent_mode.str());
  out.emplace_back("eval.smooth", eval.smoothing_label());
  out.emplace_back("eval.edit", eval.edit_hook ? eval.edit_hook->str() : "identity");
  out.emplace_back("eval.batch_size", std::to_string(eval.batch_size));
  return out;
}

void apply_config_text(ExperimentConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  apply_config_text(cfg, ss.str(), path.string());
  return cfg;
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  config.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.key_values()) out += k + " = " + v + "\n";
  return out;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("REED_SEED");
  if (!v || !*v) return std::nullopt;
  return parse_u64("REED_SEED", v);
}

}  // namespace reed
