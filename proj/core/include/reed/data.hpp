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
#include <string>
#include <vector>

#include "reed/image.hpp"

namespace reed {

enum class SplitTag { kTrain, kVal, kTest, kAll };
std::string to_string(SplitTag tag);

// Non-empty, immutable collection of same-shaped images.
class Dataset {
 public:
  Dataset(std::string name, SplitTag tag, std::vector<Image> items, std::vector<std::string> ids = {});

  const std::string& name() const { return name_; }
  SplitTag split_tag() const { return tag_; }
  const std::vector<Image>& items() const { return items_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return items_.size(); }
  const Image& operator[](std::size_t i) const { return items_[i]; }

  int height() const { return items_.front().height(); }
  int width() const { return items_.front().width(); }
  int channels() const { return items_.front().channels(); }

  // Order-sensitive FNV-1a hash over ids and pixel bytes.
  std::uint64_t fingerprint() const;

  Dataset subset(const std::vector<std::size_t>& indices, std::string name, SplitTag tag) const;

 private:
  std::string name_;
  SplitTag tag_;
  std::vector<Image> items_;
  std::vector<std::string> ids_;
};

// Decodes every PNG/PPM in root (non-recursive, sorted by file name),
// center-crops to a square and resizes to target_size. Corrupt files are
// skipped with a warning.
Dataset load_dataset(const std::filesystem::path& root, int target_size, int channels = 3);

// Procedural images: smooth color gradients, a few ellipses and
// rectangles, and a band-limited sinusoidal texture. Deterministic in seed.
Dataset generate_synthetic(int count, int size, std::uint64_t seed, int channels = 3);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  bool operator==(const SplitFractions&) const = default;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded random partition into three non-empty parts.
DatasetSplits split(const Dataset& dataset, SplitFractions fractions, std::uint64_t seed);

// Index batches for one epoch. The shuffle permutation depends only on
// (seed, epoch).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, int batch_size, bool shuffle,
                                                    std::uint64_t seed, int epoch);

// Single-consumer cursor over mini-batches of a dataset.
class BatchIterator {
 public:
  BatchIterator(const Dataset& dataset, int batch_size, bool shuffle, std::uint64_t seed);

  void start_epoch(int epoch);
  bool next(Tensor& batch);
  int epoch() const { return epoch_; }
  const std::vector<std::size_t>& last_indices() const { return last_; }

 private:
  const Dataset& dataset_;
  int batch_size_;
  bool shuffle_;
  std::uint64_t seed_;
  int epoch_ = 0;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> last_;
};

// Plain-text index: a comment header followed by one item id per line.
void write_manifest(const Dataset& dataset, const std::filesystem::path& path);
std::vector<std::string> read_manifest(const std::filesystem::path& path);

// Writes <id>.png for every item plus manifest.txt.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace reed
