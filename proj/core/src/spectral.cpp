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

#include "reed/spectral.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace reed {

namespace {

using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

ComplexMatrix dft_matrix(int n) {
  ComplexMatrix w(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * double((long(k) * j) % n) / n;
      w(k, j) = {std::cos(ang), std::sin(ang)};
    }
  return w;
}

// |F|^2 / n^2 in natural (uncentered) order.
Eigen::MatrixXd power_spectrum(const Image& image) {
  if (image.height() != image.width()) throw ShapeError("spectral analysis needs a square image");
  const Image lum = to_luminance(image);
  const int n = lum.height();
  Eigen::MatrixXd x(n, n);
  for (int y = 0; y < n; ++y)
    for (int c = 0; c < n; ++c) x(y, c) = lum.at(0, y, c);
  const ComplexMatrix w = dft_matrix(n);
  const ComplexMatrix f = w * x.cast<std::complex<double>>() * w.transpose();
  return f.cwiseAbs2() / (double(n) * n);
}

int centered_freq(int k, int n) { return k < (n + 1) / 2 ? k : k - n; }

}  // namespace

double radial_frequency(int row, int col, int n) {
  const double u = centered_freq(row, n), v = centered_freq(col, n);
  return std::sqrt(u * u + v * v);
}

int band_index(double radius, int n, int bands) {
  const double r_max = std::sqrt(2.0) * (n / 2);
  if (r_max <= 0) return 0;
  return std::min(bands - 1, int(std::floor(radius / r_max * bands)));
}

SpectrumProfile magnitude_spectrum(const Image& image, int bands) {
  if (bands < 1) throw ConfigError("band count must be >= 1");
  const Eigen::MatrixXd p = power_spectrum(image);
  const int n = int(p.rows());
  SpectrumProfile out;
  out.size = n;
  out.log_magnitude.assign(std::size_t(n) * n, 0.0);
  out.band_energies.assign(bands, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double e = p(r, c);
      out.band_energies[band_index(radial_frequency(r, c, n), n, bands)] += e;
      out.total_energy += e;
      const int cr = (r + n / 2) % n, cc = (c + n / 2) % n;
      out.log_magnitude[std::size_t(cr) * n + cc] = std::log1p(std::sqrt(e) * n);
    }
  return out;
}

double high_frequency_energy(const Image& image, double cutoff_fraction) {
  if (!(cutoff_fraction > 0 && cutoff_fraction < 1)) throw ConfigError("cutoff fraction must be in (0,1)");
  const Eigen::MatrixXd p = power_spectrum(image);
  const int n = int(p.rows());
  const double cutoff = cutoff_fraction * (n / 2.0);
  double e = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (radial_frequency(r, c, n) > cutoff) e += p(r, c);
  return e;
}

double high_frequency_retention(const Image& reference, const Image& candidate, double cutoff_fraction) {
  require_same_shape(reference, candidate, "high_frequency_retention");
  const double ref = high_frequency_energy(reference, cutoff_fraction);
  if (ref < 1e-12) throw DegenerateReference("reference has no energy above the cutoff");
  return high_frequency_energy(candidate, cutoff_fraction) / ref;
}

std::vector<double> spectral_degradation_series(std::span<const Image> sequence, double cutoff_fraction) {
  if (sequence.size() < 2) throw ConfigError("degradation series needs at least two images");
  std::vector<double> out;
  out.reserve(sequence.size() - 1);
  for (std::size_t i = 1; i < sequence.size(); ++i)
    out.push_back(high_frequency_retention(sequence[0], sequence[i], cutoff_fraction));
  return out;
}

Image spectrum_heatmap(const SpectrumProfile& profile) {
  const int n = profile.size;
  Image out(n, n, 1);
  const auto [lo, hi] = std::minmax_element(profile.log_magnitude.begin(), profile.log_magnitude.end());
  const double span = *hi - *lo;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out.at(0, r, c) = span > 0 ? float((profile.log_magnitude[std::size_t(r) * n + c] - *lo) / span) : 0.0f;
  return out;
}

}  // namespace reed
