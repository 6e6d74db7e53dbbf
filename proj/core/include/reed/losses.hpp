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

#include "reed/image.hpp"
#include "reed/vae.hpp"

namespace reed {

// Weights of the perceptual (alpha) and KL (beta) terms.
struct LossWeights {
  double alpha = 0.01;
  double beta = 1.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

double mse(const Image& a, const Image& b);
template <typename T>
double mse(const BasicTensor<T>& a, const BasicTensor<T>& b);

// Multi-scale gradient distance. For pyramid levels 0..2 (each level is a
// [1 4 6 4 1]/16 binomial blur of the previous one, subsampled by 2, with
// clamped borders) it adds the mean squared difference of horizontal and
// vertical forward differences. Batches are averaged per image.
inline constexpr int kPerceptualLevels = 3;

double perceptual_distance(const Image& a, const Image& b);
template <typename T>
double perceptual_distance(const BasicTensor<T>& a, const BasicTensor<T>& b);

// d/da of perceptual_distance(a, b) for a batch, scaled by `scale`.
template <typename T>
BasicTensor<T> perceptual_gradient(const BasicTensor<T>& a, const BasicTensor<T>& b, double scale);

struct LossTerms {
  double total = 0.0;
  double mse = 0.0;
  double perceptual = 0.0;
  double kl = 0.0;
};

// mse(target, xk) + alpha * perceptual(target, xk) + beta * KL(dist_k).
// target is x^1 under the first-step loss and x^0 otherwise.
template <typename T>
LossTerms train_loss(const BasicTensor<T>& target, const BasicTensor<T>& xk, const LatentDistribution<T>& dist_k,
                     const LossWeights& w);

// mse(x0, xk) + alpha * perceptual(x0, xk); no KL term.
template <typename T>
double val_loss(const BasicTensor<T>& x0, const BasicTensor<T>& xk, double alpha);

// Gradient of mse(target, xk) + alpha * perceptual(target, xk) w.r.t. xk.
template <typename T>
BasicTensor<T> reconstruction_gradient(const BasicTensor<T>& target, const BasicTensor<T>& xk, double alpha);

// Gradients of beta * KL(dist) w.r.t. mean and log-variance, batch-averaged.
template <typename T>
void kl_gradient(const LatentDistribution<T>& dist, double beta, BasicTensor<T>& d_mean,
                 BasicTensor<T>& d_log_variance);

}  // namespace reed
