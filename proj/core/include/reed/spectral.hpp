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

#include "reed/image.hpp"

namespace reed {

inline constexpr int kSpectralBands = 8;
inline constexpr double kDefaultCutoffFraction = 0.5;

// Spectrum of the luminance of a square image. The forward transform is
// unnormalized; energies are |F|^2 / (H*W) so that total_energy equals the
// sum of squared pixel values.
struct SpectrumProfile {
  int size = 0;
  std::vector<double> log_magnitude;  // size x size, DC at (size/2, size/2), log(1 + |F|)
  std::vector<double> band_energies;  // equal-width radial annuli from 0 to the corner radius
  double total_energy = 0.0;
};

SpectrumProfile magnitude_spectrum(const Image& image, int bands = kSpectralBands);

// Centered radial frequency of DFT bin (row, col) for an n x n transform,
// in cycles per image.
double radial_frequency(int row, int col, int n);
// Annulus index of a radius for an n x n transform split into `bands`.
int band_index(double radius, int n, int bands);

// Energy above cutoff_fraction * Nyquist.
double high_frequency_energy(const Image& image, double cutoff_fraction);

// Ratio of candidate to reference energy above the cutoff. Above 1 means
// injected high-frequency content, below 1 means blurring.
double high_frequency_retention(const Image& reference, const Image& candidate,
                                double cutoff_fraction = kDefaultCutoffFraction);

// Element i is the retention of sequence[i + 1] against sequence[0].
std::vector<double> spectral_degradation_series(std::span<const Image> sequence,
                                                double cutoff_fraction = kDefaultCutoffFraction);

// Log-magnitude scaled to [0,1] as a grayscale image of the same size.
Image spectrum_heatmap(const SpectrumProfile& profile);

}  // namespace reed
