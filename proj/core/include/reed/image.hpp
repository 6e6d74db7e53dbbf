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

#include <span>
#include <vector>

#include "reed/tensor.hpp"

namespace reed {

// A single image with intensities in [0,1], stored channel-planar: each
// channel is a row-major height x width plane.
class Image {
 public:
  static constexpr int kMinSide = 8;

  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);
  Image(int height, int width, int channels, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float& at(int c, int y, int x) { return data_[(std::size_t(c) * height_ + y) * width_ + x]; }
  float at(int c, int y, int x) const { return data_[(std::size_t(c) * height_ + y) * width_ + x]; }

  std::span<float> pixels() { return data_; }
  std::span<const float> pixels() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }
  bool operator==(const Image&) const = default;

  // Every element finite and inside [0,1].
  bool is_valid() const;
  // Clamps into [0,1], replacing non-finite values with 0.
  void clamp01();

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

void require_same_shape(const Image& a, const Image& b, const char* what);

// Packs images of identical shape into an NCHW batch and back.
Tensor stack(std::span<const Image> images);
Image unstack(const Tensor& batch, int index);
std::vector<Image> unstack_all(const Tensor& batch);

// Luminance (0.299, 0.587, 0.114) for RGB; grayscale passes through.
Image to_luminance(const Image& image);

// Separable Gaussian blur with clamped borders; radius = ceil(3 sigma).
Image gaussian_blur(const Image& image, double sigma);

}  // namespace reed
