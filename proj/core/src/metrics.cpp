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

#include "reed/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "reed/losses.hpp"

namespace reed {

double psnr_from_mse(double m) {
  if (m < 1e-10) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / m));
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

namespace {

std::vector<double> gaussian_taps() {
  std::vector<double> k(kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) sum += k[i] = std::exp(-0.5 * (i - r) * (i - r) / (kSsimSigma * kSsimSigma));
  for (auto& v : k) v /= sum;
  return k;
}

// Valid-mode separable filtering of one h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w, const std::vector<double>& k) {
  const int kw = int(k.size());
  const int oh = h - kw + 1, ow = w - kw + 1;
  std::vector<double> tmp(std::size_t(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kw; ++i) acc += k[i] * src[std::size_t(y) * w + x + i];
      tmp[std::size_t(y) * ow + x] = acc;
    }
  std::vector<double> out(std::size_t(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kw; ++i) acc += k[i] * tmp[std::size_t(y + i) * ow + x];
      out[std::size_t(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow)
    throw ShapeError("ssim needs images of at least 11x11 pixels");
  static const std::vector<double> taps = gaussian_taps();
  const int h = a.height(), w = a.width();
  const std::size_t plane = std::size_t(h) * w;
  double total = 0;
  std::size_t count = 0;
  std::vector<double> pa(plane), pb(plane), paa(plane), pbb(plane), pab(plane);
  for (int c = 0; c < a.channels(); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      const double x = a.values()[c * plane + i], y = b.values()[c * plane + i];
      pa[i] = x;
      pb[i] = y;
      paa[i] = x * x;
      pbb[i] = y * y;
      pab[i] = x * y;
    }
    const auto mu_a = filter_valid(pa, h, w, taps);
    const auto mu_b = filter_valid(pb, h, w, taps);
    const auto e_aa = filter_valid(paa, h, w, taps);
    const auto e_bb = filter_valid(pbb, h, w, taps);
    const auto e_ab = filter_valid(pab, h, w, taps);
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
      total += ((2 * ma * mb + kSsimC1) * (2 * cov + kSsimC2)) / ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
    }
    count += mu_a.size();
  }
  return total / double(count);
}

FeatureExtractor::FeatureExtractor(int channels)
    : channels_(channels),
      net_("features", {LayerSpec::conv(channels, 32, 3, 1, 1), LayerSpec::activation(Nonlinearity::kReLU),
                        LayerSpec::conv(32, kFeatures, 3, 2, 1), LayerSpec::activation(Nonlinearity::kReLU)}) {
  Rng rng(kSeed + std::uint64_t(channels));
  params_ = net_.init_params(rng);
}

Eigen::VectorXd FeatureExtractor::features(const Image& image) const {
  return features(std::span<const Image>(&image, 1)).row(0).transpose();
}

Eigen::MatrixXd FeatureExtractor::features(std::span<const Image> images) const {
  Eigen::MatrixXd out(images.size(), kFeatures);
  if (images.empty()) return out;
  if (images.front().channels() != channels_) throw ShapeError("feature extractor channel mismatch");
  const Tensor maps = net_.forward(params_, stack(images), nullptr);
  const std::size_t plane = std::size_t(maps.h()) * maps.w();
  for (int n = 0; n < maps.n(); ++n)
    for (int f = 0; f < kFeatures; ++f) {
      const float* p = maps.item(n).data() + f * plane;
      double s = 0;
      for (std::size_t i = 0; i < plane; ++i) s += p[i];
      out(n, f) = s / double(plane);
    }
  return out;
}

double frechet_distance(const Eigen::MatrixXd& fa, const Eigen::MatrixXd& fb) {
  if (fa.rows() < 2 || fb.rows() < 2) throw MetricError("frechet distance needs at least 2 samples per set");
  if (fa.cols() != fb.cols()) throw MetricError("frechet distance feature dimensions differ");
  const Eigen::VectorXd mu_a = fa.colwise().mean().transpose();
  const Eigen::VectorXd mu_b = fb.colwise().mean().transpose();
  const Eigen::MatrixXd ca = fa.rowwise() - mu_a.transpose();
  const Eigen::MatrixXd cb = fb.rowwise() - mu_b.transpose();
  const Eigen::MatrixXd sa = (ca.transpose() * ca) / double(fa.rows() - 1);
  const Eigen::MatrixXd sb = (cb.transpose() * cb) / double(fb.rows() - 1);

  // tr((Sa Sb)^{1/2}) = tr((Sa^{1/2} Sb Sa^{1/2})^{1/2}); the inner matrix is
  // symmetric PSD so a symmetric eigensolver suffices.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
  const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a = ea.eigenvectors() * la.asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
  const double tr_sqrt = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d = (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, d);
}

double frechet_feature_distance(std::span<const Image> set_a, std::span<const Image> set_b) {
  if (set_a.size() < 2 || set_b.size() < 2) throw MetricError("frechet feature distance needs >= 2 images per set");
  if (!set_a.front().same_shape(set_b.front())) throw ShapeError("frechet feature distance: image shapes differ");
  FeatureExtractor fx(set_a.front().channels());
  return frechet_distance(fx.features(set_a), fx.features(set_b));
}

}  // namespace reed
