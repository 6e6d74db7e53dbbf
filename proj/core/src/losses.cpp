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

#include "reed/losses.hpp"

#include <algorithm>
#include <cmath>

namespace reed {

namespace {

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int h_, int w_) : h(h_), w(w_), v(std::size_t(h_) * w_, 0.0) {}
  double& at(int y, int x) { return v[std::size_t(y) * w + x]; }
  double at(int y, int x) const { return v[std::size_t(y) * w + x]; }
};

Plane blur_down(const Plane& p) {
  Plane tmp(p.h, p.w), blurred(p.h, p.w);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) {
      double acc = 0;
      for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * p.at(y, std::clamp(x + k, 0, p.w - 1));
      tmp.at(y, x) = acc;
    }
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) {
      double acc = 0;
      for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * tmp.at(std::clamp(y + k, 0, p.h - 1), x);
      blurred.at(y, x) = acc;
    }
  Plane out((p.h + 1) / 2, (p.w + 1) / 2);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out.at(y, x) = blurred.at(2 * y, 2 * x);
  return out;
}

// Adjoint of blur_down back onto an (h, w) plane.
Plane blur_down_adjoint(const Plane& g, int h, int w) {
  Plane blurred(h, w);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) blurred.at(2 * y, 2 * x) = g.at(y, x);
  Plane tmp(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = -2; k <= 2; ++k) tmp.at(std::clamp(y + k, 0, h - 1), x) += kBinomial[k + 2] * blurred.at(y, x);
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = -2; k <= 2; ++k) out.at(y, std::clamp(x + k, 0, w - 1)) += kBinomial[k + 2] * tmp.at(y, x);
  return out;
}

// Per-image difference planes (a - b), one per channel.
template <typename T>
std::vector<Plane> difference_planes(const T* a, const T* b, int c, int h, int w) {
  std::vector<Plane> planes;
  planes.reserve(c);
  for (int ch = 0; ch < c; ++ch) {
    Plane p(h, w);
    const std::size_t off = std::size_t(ch) * h * w;
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = double(a[off + i]) - double(b[off + i]);
    planes.push_back(std::move(p));
  }
  return planes;
}

// Level l of the pyramid for every channel.
std::vector<std::vector<Plane>> pyramid(std::vector<Plane> level0) {
  std::vector<std::vector<Plane>> levels;
  levels.push_back(std::move(level0));
  for (int l = 1; l < kPerceptualLevels; ++l) {
    std::vector<Plane> next;
    for (const auto& p : levels.back()) next.push_back(blur_down(p));
    levels.push_back(std::move(next));
  }
  return levels;
}

double level_distance(const std::vector<Plane>& planes) {
  double sx = 0, sy = 0;
  const int h = planes[0].h, w = planes[0].w, c = int(planes.size());
  for (const auto& p : planes) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + 1 < w; ++x) {
        const double d = p.at(y, x + 1) - p.at(y, x);
        sx += d * d;
      }
    for (int y = 0; y + 1 < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d = p.at(y + 1, x) - p.at(y, x);
        sy += d * d;
      }
  }
  double out = 0;
  if (w > 1) out += sx / (double(c) * h * (w - 1));
  if (h > 1) out += sy / (double(c) * (h - 1) * w);
  return out;
}

// Gradient of level_distance w.r.t. one channel plane.
Plane level_gradient(const Plane& p, int channels) {
  Plane g(p.h, p.w);
  if (p.w > 1) {
    const double s = 2.0 / (double(channels) * p.h * (p.w - 1));
    for (int y = 0; y < p.h; ++y)
      for (int x = 0; x + 1 < p.w; ++x) {
        const double d = s * (p.at(y, x + 1) - p.at(y, x));
        g.at(y, x + 1) += d;
        g.at(y, x) -= d;
      }
  }
  if (p.h > 1) {
    const double s = 2.0 / (double(channels) * (p.h - 1) * p.w);
    for (int y = 0; y + 1 < p.h; ++y)
      for (int x = 0; x < p.w; ++x) {
        const double d = s * (p.at(y + 1, x) - p.at(y, x));
        g.at(y + 1, x) += d;
        g.at(y, x) -= d;
      }
  }
  return g;
}

template <typename T>
double perceptual_single(const T* a, const T* b, int c, int h, int w) {
  const auto levels = pyramid(difference_planes(a, b, c, h, w));
  double total = 0;
  for (const auto& lvl : levels) total += level_distance(lvl);
  return total;
}

}  // namespace

void LossWeights::validate() const {
  if (!std::isfinite(alpha) || alpha < 0) throw ConfigError("loss alpha must be finite and >= 0");
  if (!std::isfinite(beta) || beta < 0) throw ConfigError("loss beta must be finite and >= 0");
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a.values()[i]) - double(b.values()[i]);
    s += d * d;
  }
  return a.size() ? s / double(a.size()) : 0.0;
}

template <typename T>
double mse(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "mse");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return a.size() ? s / double(a.size()) : 0.0;
}

double perceptual_distance(const Image& a, const Image& b) {
  require_same_shape(a, b, "perceptual_distance");
  return perceptual_single(a.values().data(), b.values().data(), a.channels(), a.height(), a.width());
}

template <typename T>
double perceptual_distance(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "perceptual_distance");
  if (a.n() == 0) return 0.0;
  double total = 0;
  for (int n = 0; n < a.n(); ++n) total += perceptual_single(a.item(n).data(), b.item(n).data(), a.c(), a.h(), a.w());
  return total / a.n();
}

template <typename T>
BasicTensor<T> perceptual_gradient(const BasicTensor<T>& a, const BasicTensor<T>& b, double scale) {
  require_same_shape(a, b, "perceptual_gradient");
  BasicTensor<T> grad(a.shape());
  if (a.n() == 0) return grad;
  const double per_image = scale / a.n();
  for (int n = 0; n < a.n(); ++n) {
    const auto levels = pyramid(difference_planes(a.item(n).data(), b.item(n).data(), a.c(), a.h(), a.w()));
    T* out = grad.item(n).data();
    for (int ch = 0; ch < a.c(); ++ch) {
      Plane acc = level_gradient(levels.back()[ch], a.c());
      for (int l = kPerceptualLevels - 2; l >= 0; --l) {
        const Plane& here = levels[l][ch];
        Plane up = blur_down_adjoint(acc, here.h, here.w);
        const Plane local = level_gradient(here, a.c());
        for (std::size_t i = 0; i < up.v.size(); ++i) up.v[i] += local.v[i];
        acc = std::move(up);
      }
      const std::size_t off = std::size_t(ch) * a.h() * a.w();
      for (std::size_t i = 0; i < acc.v.size(); ++i) out[off + i] = T(per_image * acc.v[i]);
    }
  }
  return grad;
}

template <typename T>
LossTerms train_loss(const BasicTensor<T>& target, const BasicTensor<T>& xk, const LatentDistribution<T>& dist_k,
                     const LossWeights& w) {
  LossTerms t;
  t.mse = mse(target, xk);
  t.perceptual = perceptual_distance(target, xk);
  t.kl = kl_standard_normal(dist_k);
  t.total = t.mse + w.alpha * t.perceptual + w.beta * t.kl;
  return t;
}

template <typename T>
double val_loss(const BasicTensor<T>& x0, const BasicTensor<T>& xk, double alpha) {
  return mse(x0, xk) + alpha * perceptual_distance(x0, xk);
}

template <typename T>
BasicTensor<T> reconstruction_gradient(const BasicTensor<T>& target, const BasicTensor<T>& xk, double alpha) {
  require_same_shape(target, xk, "reconstruction_gradient");
  BasicTensor<T> g = alpha > 0 ? perceptual_gradient(xk, target, alpha) : BasicTensor<T>(xk.shape());
  const double s = xk.size() ? 2.0 / double(xk.size()) : 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += T(s * (double(xk[i]) - double(target[i])));
  return g;
}

template <typename T>
void kl_gradient(const LatentDistribution<T>& dist, double beta, BasicTensor<T>& d_mean, BasicTensor<T>& d_lv) {
  d_mean = BasicTensor<T>(dist.mean.shape());
  d_lv = BasicTensor<T>(dist.mean.shape());
  if (dist.mean.n() == 0) return;
  const double s = beta / dist.mean.n();
  for (std::size_t i = 0; i < dist.mean.size(); ++i) {
    d_mean[i] = T(s * dist.mean[i]);
    d_lv[i] = T(0.5 * s * (std::exp(double(dist.log_variance[i])) - 1.0));
  }
}

#define REED_INSTANTIATE(T)                                                                                     \
  template double mse(const BasicTensor<T>&, const BasicTensor<T>&);                                           \
  template double perceptual_distance(const BasicTensor<T>&, const BasicTensor<T>&);                           \
  template BasicTensor<T> perceptual_gradient(const BasicTensor<T>&, const BasicTensor<T>&, double);           \
  template LossTerms train_loss(const BasicTensor<T>&, const BasicTensor<T>&, const LatentDistribution<T>&,    \
                                const LossWeights&);                                                           \
  template double val_loss(const BasicTensor<T>&, const BasicTensor<T>&, double);                              \
  template BasicTensor<T> reconstruction_gradient(const BasicTensor<T>&, const BasicTensor<T>&, double);       \
  template void kl_gradient(const LatentDistribution<T>&, double, BasicTensor<T>&, BasicTensor<T>&);

REED_INSTANTIATE(float)
REED_INSTANTIATE(double)
#undef REED_INSTANTIATE

}  // namespace reed
