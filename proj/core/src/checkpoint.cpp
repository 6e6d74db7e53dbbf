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

#include "reed/checkpoint.hpp"

#include <unistd.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace reed {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'E', 'E', 'D', 'C', 'K', 'P', 'T'};
constexpr std::size_t kPrefix = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(const std::string& in, std::size_t at) {
  T v;
  std::memcpy(&v, in.data() + at, sizeof v);
  return v;
}

nlohmann::json arch_json(const ArchConfig& a) {
  return {{"image_size", a.image_size},           {"channels", a.channels},
          {"latent_channels", a.latent_channels}, {"conv_widths", a.conv_widths},
          {"nonlinearity", a.nonlinearity},       {"refine_convs", a.refine_convs},
          {"seed", a.seed}};
}

ArchConfig arch_from_json(const nlohmann::json& j) {
  ArchConfig a;
  a.image_size = j.at("image_size").get<int>();
  a.channels = j.at("channels").get<int>();
  a.latent_channels = j.at("latent_channels").get<int>();
  a.conv_widths = j.at("conv_widths").get<std::vector<int>>();
  a.nonlinearity = j.at("nonlinearity").get<std::string>();
  a.refine_convs = j.at("refine_convs").get<int>();
  a.seed = j.at("seed").get<std::uint64_t>();
  return a;
}

void add_tensors(nlohmann::json& list, std::string& data, const ParamSet<float>& ps) {
  for (const auto& p : ps) {
    list.push_back({{"name", p.name},
                    {"shape", p.shape},
                    {"offset", data.size()},
                    {"count", p.value.size()}});
    data.append(reinterpret_cast<const char*>(p.value.data()), p.value.size() * sizeof(float));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move checkpoint into place at " + path.string());
  }
}

std::string save_checkpoint(const ModelParameters& model, const std::optional<CurriculumState>& state,
                            const std::filesystem::path& path) {
  nlohmann::json header;
  header["arch"] = arch_json(model.arch);
  header["encoder_trainable"] = model.encoder_trainable;
  header["tensors"] = nlohmann::json::array();
  std::string data;
  add_tensors(header["tensors"], data, model.encoder);
  add_tensors(header["tensors"], data, model.decoder);
  if (state) {
    header["curriculum"] = {{"k", state->k},
                            {"best_val_loss", std::isfinite(state->best_val_loss)
                                                  ? nlohmann::json(state->best_val_loss)
                                                  : nlohmann::json(nullptr)},
                            {"plateau_counter", state->plateau_counter},
                            {"terminated", state->terminated}};
  }
  const std::string h = header.dump();

  std::string out;
  out.append(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, h.size());
  out += h;
  out += data;
  const std::uint64_t sum = fnv1a(out.data(), out.size());
  put<std::uint64_t>(out, sum);
  atomic_write(path, out);
  return hex64(sum);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
  const std::string bytes = read_file(path);
  if (bytes.size() < kPrefix + sizeof(std::uint64_t) || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ChecksumError("not a checkpoint or truncated: " + path.string());
  const auto version = get<std::uint32_t>(bytes, sizeof kMagic);
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  const auto stored = get<std::uint64_t>(bytes, body);
  if (fnv1a(bytes.data(), body) != stored) throw ChecksumError("checksum mismatch in " + path.string());

  const auto hlen = get<std::uint64_t>(bytes, sizeof kMagic + sizeof(std::uint32_t));
  if (hlen > body - kPrefix) throw ChecksumError("header length out of range in " + path.string());
  const std::size_t data_start = kPrefix + hlen;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPrefix, bytes.begin() + std::ptrdiff_t(data_start));
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(std::string("unreadable checkpoint header: ") + e.what());
  }

  LoadedCheckpoint out;
  out.format_version = version;
  out.id = hex64(stored);
  try {
    const ArchConfig arch = arch_from_json(header.at("arch"));
    arch.validate();
    ModelParameters m;
    m.arch = arch;
    m.encoder_net = build_encoder(arch);
    m.decoder_net = build_decoder(arch);
    m.encoder = zeros_like(m.encoder_net.param_layout());
    m.decoder = zeros_like(m.decoder_net.param_layout());
    m.latent_channels = arch.latent_channels;
    m.encoder_trainable = header.at("encoder_trainable").get<bool>();

    const auto& tensors = header.at("tensors");
    if (tensors.size() != m.encoder.size() + m.decoder.size())
      throw ShapeError("checkpoint tensor count does not match its architecture");
    std::size_t t = 0;
    for (ParamSet<float>* ps : {&m.encoder, &m.decoder}) {
      for (auto& p : *ps) {
        const auto& d = tensors.at(t++);
        const auto shape = d.at("shape").get<std::vector<int>>();
        if (d.at("name").get<std::string>() != p.name || shape != p.shape)
          throw ShapeError("checkpoint tensor " + d.at("name").get<std::string>() +
                           " does not match the architecture's " + p.name);
        const auto offset = d.at("offset").get<std::size_t>();
        const auto count = d.at("count").get<std::size_t>();
        if (count != p.value.size() || data_start + offset + count * sizeof(float) > body)
          throw ChecksumError("tensor " + p.name + " lies outside the checkpoint data");
        std::memcpy(p.value.data(), bytes.data() + data_start + offset, count * sizeof(float));
      }
    }
    out.model = std::move(m);
    if (header.contains("curriculum")) {
      const auto& c = header["curriculum"];
      CurriculumState s;
      s.k = c.at("k").get<int>();
      s.best_val_loss = c.at("best_val_loss").is_null() ? std::numeric_limits<double>::infinity()
                                                        : c.at("best_val_loss").get<double>();
      s.plateau_counter = c.at("plateau_counter").get<int>();
      s.terminated = c.at("terminated").get<bool>();
      out.curriculum = s;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(std::string("malformed checkpoint header: ") + e.what());
  }
  return out;
}

std::string code_version_string() {
#ifdef REED_VERSION
  return std::string("reed ") + REED_VERSION;
#else
  return "reed unknown";
#endif
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_run_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config_text;
  j["dataset_fingerprint"] = hex64(m.dataset_fingerprint);
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["code_version"] = m.code_version.empty() ? code_version_string() : m.code_version;
  j["code_hash"] = m.code_hash.empty() ? hex64(fnv1a(j["code_version"].get<std::string>().data(),
                                                     j["code_version"].get<std::string>().size()))
                                       : m.code_hash;
  j["epoch_seconds"] = m.epoch_seconds;
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace reed
