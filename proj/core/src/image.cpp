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

#include "reed/image.hpp"

#include <algorithm>
#include <cmath>

namespace reed {

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels), data_(std::size_t(height) * width * channels, fill) {
  if (height < 1 || width < 1 || channels < 1) throw ShapeError("image dimensions must be positive");
}

Image::Image(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 1 || width < 1 || channels < 1) throw ShapeError("image dimensions must be positive");
  if (data_.size() != std::size_t(height) * width * channels) throw ShapeError("image data does not match shape");
}

bool Image::is_valid() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

void Image::clamp01() {
  for (auto& v : data_) v = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": image shapes differ (" + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                     std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                     std::to_string(b.channels()) + ")");
  }
}

Tensor stack(std::span<const Image> images) {
  if (images.empty()) throw ShapeError("cannot stack an empty image list");
  const Image& first = images.front();
  Tensor t({int(images.size()), first.channels(), first.height(), first.width()});
  for (std::size_t i = 0; i < images.size(); ++i) {
    require_same_shape(first, images[i], "stack");
    std::copy(images[i].values().begin(), images[i].values().end(), t.item(int(i)).begin());
  }
  return t;
}

Image unstack(const Tensor& batch, int index) {
  auto src = batch.item(index);
  return Image(batch.h(), batch.w(), batch.c(), std::vector<float>(src.begin(), src.end()));
}

std::vector<Image> unstack_all(const Tensor& batch) {
  std::vector<Image> out;
  out.reserve(batch.n());
  for (int i = 0; i < batch.n(); ++i) out.push_back(unstack(batch, i));
  return out;
}

Image to_luminance(const Image& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3) throw ShapeError("luminance needs 1 or 3 channels");
  Image out(image.height(), image.width(), 1);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      out.at(0, y, x) = 0.299f * image.at(0, y, x) + 0.587f * image.at(1, y, x) + 0.114f * image.at(2, y, x);
  return out;
}

Image gaussian_blur(const Image& image, double sigma) {
  if (sigma <= 0) return image;
  const int radius = int(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;

  const int H = image.height(), W = image.width();
  Image tmp(H, W, image.channels());
  Image out(H, W, image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * image.at(c, y, std::clamp(x + i, 0, W - 1));
        tmp.at(c, y, x) = float(acc);
      }
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp.at(c, std::clamp(y + i, 0, H - 1), x);
        out.at(c, y, x) = float(acc);
      }
  }
  return out;
}

}  // namespace reed
