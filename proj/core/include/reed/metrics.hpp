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

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "reed/image.hpp"
#include "reed/nn.hpp"

namespace reed {

inline constexpr double kPsnrCapDb = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Peak signal 1; capped at 99 dB when mse < 1e-10.
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse);

// Gaussian-window SSIM (11x11, sigma 1.5, dynamic range 1) averaged over
// channels and all valid window positions.
double ssim(const Image& a, const Image& b);

// Fixed random convolutional projector: conv3x3(C->32) relu,
// conv3x3 stride 2 (32->64) relu, global average pool -> 64 features.
class FeatureExtractor {
 public:
  static constexpr int kFeatures = 64;
  static constexpr std::uint64_t kSeed = 0x5EEDF1D5ULL;

  explicit FeatureExtractor(int channels);
  Eigen::VectorXd features(const Image& image) const;
  // One row per image.
  Eigen::MatrixXd features(std::span<const Image> images) const;

 private:
  int channels_;
  Network net_;
  ParamSet<float> params_;
};

// Frechet distance between Gaussian fits of two feature samples (rows are
// samples): |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}). Sample
// covariances use the n-1 normalization. Each side needs >= 2 rows.
double frechet_distance(const Eigen::MatrixXd& features_a, const Eigen::MatrixXd& features_b);

double frechet_feature_distance(std::span<const Image> set_a, std::span<const Image> set_b);

}  // namespace reed
