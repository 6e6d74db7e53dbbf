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
#include <vector>

#include "reed/curriculum.hpp"
#include "reed/vae.hpp"

namespace reed {

// File layout (all integers little-endian):
//   8 bytes   magic "REEDCKPT"
//   u32       format version
//   u64       header length H
//   H bytes   JSON header: arch, encoder_trainable, tensors [{name, shape,
//             offset, count}], optional curriculum
//   ...       float32 tensor data, offsets relative to the data start
//   u64       FNV-1a over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Returns the checkpoint id (hex checksum). The file is written to a
// temporary sibling and renamed into place.
std::string save_checkpoint(const ModelParameters& model, const std::optional<CurriculumState>& state,
                            const std::filesystem::path& path);

struct LoadedCheckpoint {
  ModelParameters model;
  std::optional<CurriculumState> curriculum;
  std::string id;
  std::uint32_t format_version = kCheckpointVersion;
};

// IoError if missing, VersionError on a foreign version, ChecksumError on
// corruption or truncation.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_text;
  std::uint64_t dataset_fingerprint = 0;
  std::uint64_t seed = 0;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
  std::string code_version;
  std::string code_hash;    // FNV-1a of code_version
  std::vector<double> epoch_seconds;  // wall time per epoch, kept out of run logs
};

std::string code_version_string();
std::string utc_timestamp();
// Written once at the end of a run, atomically.
void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Writes bytes to path via a temporary file and rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

}  // namespace reed
