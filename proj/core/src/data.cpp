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

#include "reed/data.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "reed/image_io.hpp"
#include "reed/random.hpp"

namespace reed {

namespace fs = std::filesystem;

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kVal: return "val";
    case SplitTag::kTest: return "test";
    case SplitTag::kAll: return "all";
  }
  return "all";
}

Dataset::Dataset(std::string name, SplitTag tag, std::vector<Image> items, std::vector<std::string> ids)
    : name_(std::move(name)), tag_(tag), items_(std::move(items)), ids_(std::move(ids)) {
  if (items_.empty()) throw EmptyDataset("dataset '" + name_ + "' has no items");
  for (const auto& im : items_) {
    require_same_shape(items_.front(), im, "dataset");
    if (im.height() < Image::kMinSide || im.width() < Image::kMinSide)
      throw ShapeError("dataset images must be at least 8x8");
  }
  if (ids_.empty()) {
    char buf[16];
    for (std::size_t i = 0; i < items_.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%06zu", i);
      ids_.emplace_back(buf);
    }
  }
  if (ids_.size() != items_.size()) throw ShapeError("dataset ids do not match items");
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t i = 0; i < items_.size(); ++i) {
    feed(ids_[i].data(), ids_[i].size());
    feed(items_[i].values().data(), items_[i].size() * sizeof(float));
  }
  return h;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices, std::string name, SplitTag tag) const {
  std::vector<Image> items;
  std::vector<std::string> ids;
  for (auto i : indices) {
    items.push_back(items_.at(i));
    ids.push_back(ids_.at(i));
  }
  return Dataset(std::move(name), tag, std::move(items), std::move(ids));
}

Dataset load_dataset(const fs::path& root, int target_size, int channels) {
  if (!fs::exists(root)) throw NotFound("dataset path does not exist: " + root.string());
  if (target_size < Image::kMinSide) throw ConfigError("target size must be >= 8");
  std::vector<fs::path> files;
  if (fs::is_directory(root)) {
    for (const auto& e : fs::directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm") files.push_back(e.path());
    }
  } else {
    files.push_back(root);
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> items;
  std::vector<std::string> ids;
  for (const auto& f : files) {
    try {
      Image im = read_image(f);
      im = resize_bilinear(center_crop_square(im), target_size, target_size);
      im = convert_channels(im, channels);
      im.clamp01();
      items.push_back(std::move(im));
      ids.push_back(f.stem().string());
    } catch (const Error& e) {
      spdlog::warn("skipping {}: {}", f.string(), e.what());
    }
  }
  if (items.empty()) throw EmptyDataset("no decodable images in " + root.string());
  return Dataset(root.filename().string(), SplitTag::kAll, std::move(items), std::move(ids));
}

namespace {

Image synth_image(int size, int channels, Rng& rng) {
  const double S = size;
  Image im(size, size, channels);

  // Smooth linear gradient per channel.
  for (int c = 0; c < channels; ++c) {
    const double base = rng.uniform(0.2, 0.8);
    const double amp = rng.uniform(-0.35, 0.35);
    const double th = rng.uniform(0, 2 * std::numbers::pi);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        im.at(c, y, x) = float(base + amp * ((x / S - 0.5) * std::cos(th) + (y / S - 0.5) * std::sin(th)));
  }

  // Ellipses and rectangles with a one-pixel soft edge.
  const int shapes = rng.uniform_int(1, 3);
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.15, 0.85) * S, cy = rng.uniform(0.15, 0.85) * S;
    const double rx = rng.uniform(0.1, 0.3) * S, ry = rng.uniform(0.1, 0.3) * S;
    const double rot = rng.uniform(0, std::numbers::pi);
    double color[3];
    for (auto& v : color) v = rng.uniform(0.05, 0.95);
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double u = cr * dx + sr * dy, v = -sr * dx + cr * dy;
        double dist;  // approximate signed distance in pixels, negative inside
        if (ellipse) {
          const double r = std::sqrt((u * u) / (rx * rx) + (v * v) / (ry * ry));
          dist = (r - 1.0) * std::min(rx, ry);
        } else {
          dist = std::max(std::abs(u) - rx, std::abs(v) - ry);
        }
        const double cover = std::clamp(0.5 - dist, 0.0, 1.0);
        if (cover <= 0) continue;
        for (int c = 0; c < channels; ++c)
          im.at(c, y, x) = float((1 - cover) * im.at(c, y, x) + cover * color[c % 3]);
      }
  }

  // Band-limited texture: a few oriented sinusoids below 0.7 Nyquist.
  const int waves = rng.uniform_int(1, 3);
  for (int k = 0; k < waves; ++k) {
    const double freq = rng.uniform(2.0, 0.35 * S);  // cycles per image
    const double th = rng.uniform(0, std::numbers::pi);
    const double phase = rng.uniform(0, 2 * std::numbers::pi);
    const double amp = rng.uniform(0.02, 0.07);
    double gain[3];
    for (auto& g : gain) g = rng.uniform(0.5, 1.0);
    const double kx = 2 * std::numbers::pi * freq * std::cos(th) / S;
    const double ky = 2 * std::numbers::pi * freq * std::sin(th) / S;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double t = amp * std::sin(kx * x + ky * y + phase);
        for (int c = 0; c < channels; ++c) im.at(c, y, x) += float(gain[c % 3] * t);
      }
  }
  im.clamp01();
  return im;
}

}  // namespace

Dataset generate_synthetic(int count, int size, std::uint64_t seed, int channels) {
  if (count < 1) throw ConfigError("synthetic dataset count must be >= 1");
  if (size < Image::kMinSide) throw ConfigError("synthetic image size must be >= 8");
  if (channels != 1 && channels != 3) throw ConfigError("synthetic channels must be 1 or 3");
  Rng root(seed);
  std::vector<Image> items;
  items.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = root.fork(std::uint64_t(i));
    items.push_back(synth_image(size, channels, rng));
  }
  return Dataset("synthetic-" + std::to_string(seed), SplitTag::kAll, std::move(items));
}

DatasetSplits split(const Dataset& dataset, SplitFractions f, std::uint64_t seed) {
  if (!(f.train > 0 && f.val > 0 && f.test > 0) || std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw SplitError("split fractions must be positive and sum to 1");
  const std::size_t n = dataset.size();
  if (n < 3) throw SplitError("need at least 3 items to split, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());

  long n_train = std::lround(f.train * double(n));
  long n_val = std::lround(f.val * double(n));
  n_train = std::clamp<long>(n_train, 1, long(n) - 2);
  n_val = std::clamp<long>(n_val, 1, long(n) - n_train - 1);

  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + std::ptrdiff_t(from), order.begin() + std::ptrdiff_t(from + count));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const std::string& base = dataset.name();
  return DatasetSplits{dataset.subset(take(0, n_train), base + "/train", SplitTag::kTrain),
                       dataset.subset(take(n_train, n_val), base + "/val", SplitTag::kVal),
                       dataset.subset(take(n_train + n_val, n - n_train - n_val), base + "/test", SplitTag::kTest)};
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, int batch_size, bool shuffle,
                                                    std::uint64_t seed, int epoch) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng = Rng(seed).fork(std::uint64_t(epoch));
    std::shuffle(order.begin(), order.end(), rng.engine());
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < count; i += std::size_t(batch_size))
    batches.emplace_back(order.begin() + std::ptrdiff_t(i),
                         order.begin() + std::ptrdiff_t(std::min(count, i + std::size_t(batch_size))));
  return batches;
}

BatchIterator::BatchIterator(const Dataset& dataset, int batch_size, bool shuffle, std::uint64_t seed)
    : dataset_(dataset), batch_size_(batch_size), shuffle_(shuffle), seed_(seed) {
  start_epoch(0);
}

void BatchIterator::start_epoch(int epoch) {
  epoch_ = epoch;
  batches_ = epoch_batches(dataset_.size(), batch_size_, shuffle_, seed_, epoch);
  cursor_ = 0;
}

bool BatchIterator::next(Tensor& batch) {
  if (cursor_ >= batches_.size()) return false;
  last_ = batches_[cursor_++];
  const Image& first = dataset_[0];
  batch = Tensor({int(last_.size()), first.channels(), first.height(), first.width()});
  for (std::size_t i = 0; i < last_.size(); ++i) {
    const auto& v = dataset_[last_[i]].values();
    std::copy(v.begin(), v.end(), batch.item(int(i)).begin());
  }
  return true;
}

void write_manifest(const Dataset& dataset, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "# dataset " << dataset.name() << " split " << to_string(dataset.split_tag()) << " count "
      << dataset.size() << " size " << dataset.height() << "x" << dataset.width() << "x" << dataset.channels()
      << "\n";
  for (const auto& id : dataset.ids()) out << id << "\n";
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ids.push_back(line);
  return ids;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < dataset.size(); ++i) write_png(dataset[i], dir / (dataset.ids()[i] + ".png"));
  write_manifest(dataset, dir / "manifest.txt");
}

}  // namespace reed
