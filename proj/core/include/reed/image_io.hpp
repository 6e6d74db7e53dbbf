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

#include <filesystem>

#include "reed/image.hpp"

namespace reed {

// 8-bit PNG (gray or RGB, alpha dropped). Throws IoError on failure.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

// Binary PPM (P6) and PGM (P5), maxval up to 65535.
Image read_pnm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// Dispatches on the file signature.
Image read_image(const std::filesystem::path& path);

// Largest centered square.
Image center_crop_square(const Image& image);
// Bilinear resampling with half-pixel centers and clamped borders.
Image resize_bilinear(const Image& image, int height, int width);
// Gray to RGB by replication, RGB to gray by luminance.
Image convert_channels(const Image& image, int channels);

}  // namespace reed
