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

#include "reed/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace reed {

Image read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const int h = int(img.height), w = int(img.width);
  Image out(h, w, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        out.at(c, y, x) = float(buf[(std::size_t(y) * w + x) * channels + c]) / 255.0f;
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) throw IoError("PNG export needs 1 or 3 channels");
  const int h = image.height(), w = image.width(), ch = image.channels();
  std::vector<unsigned char> buf(std::size_t(h) * w * ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const float v = std::isfinite(image.at(c, y, x)) ? std::clamp(image.at(c, y, x), 0.0f, 1.0f) : 0.0f;
        buf[(std::size_t(y) * w + x) * ch + c] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(w);
  img.height = png_uint_32(h);
  img.format = ch == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

int pnm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed PNM header in " + path.string());
  }
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  if (magic != "P6" && magic != "P5") throw IoError("not a binary PPM/PGM file: " + path.string());
  const int channels = magic == "P6" ? 3 : 1;
  const int w = pnm_int(in, path), h = pnm_int(in, path), maxval = pnm_int(in, path);
  if (maxval > 65535) throw IoError("PNM maxval out of range in " + path.string());
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(std::size_t(w) * h * channels * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (std::size_t(in.gcount()) != buf.size()) throw IoError("truncated PNM data in " + path.string());
  Image out(h, w, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = (std::size_t(y) * w + x) * channels + c;
        const int v = bytes == 1 ? buf[i] : (buf[2 * i] << 8 | buf[2 * i + 1]);
        out.at(c, y, x) = std::min(1.0f, float(v) / float(maxval));
      }
  return out;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const int ch = image.channels();
  if (ch != 1 && ch != 3) throw IoError("PPM export needs 1 or 3 channels");
  out << (ch == 3 ? "P6" : "P5") << "\n" << image.width() << " " << image.height() << "\n255\n";
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < ch; ++c)
        out.put(char(static_cast<unsigned char>(std::lround(std::clamp(image.at(c, y, x), 0.0f, 1.0f) * 255.0f))));
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() >= 2 && sig[0] == 'P' && (sig[1] == '6' || sig[1] == '5')) return read_pnm(path);
  if (in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  throw IoError("unrecognized image format: " + path.string());
}

Image center_crop_square(const Image& image) {
  const int side = std::min(image.height(), image.width());
  const int y0 = (image.height() - side) / 2, x0 = (image.width() - side) / 2;
  if (side == image.height() && side == image.width()) return image;
  Image out(side, side, image.channels());
  for (int c = 0; c < image.channels(); ++c)
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) out.at(c, y, x) = image.at(c, y0 + y, x0 + x);
  return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (height == image.height() && width == image.width()) return image;
  Image out(height, width, image.channels());
  const double sy = double(image.height()) / height, sx = double(image.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(image.height() - 1));
    const int y0 = int(fy), y1 = std::min(y0 + 1, image.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(image.width() - 1));
      const int x0 = int(fx), x1 = std::min(x0 + 1, image.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < image.channels(); ++c) {
        const double top = (1 - tx) * image.at(c, y0, x0) + tx * image.at(c, y0, x1);
        const double bot = (1 - tx) * image.at(c, y1, x0) + tx * image.at(c, y1, x1);
        out.at(c, y, x) = float((1 - ty) * top + ty * bot);
      }
    }
  }
  return out;
}

Image convert_channels(const Image& image, int channels) {
  if (image.channels() == channels) return image;
  if (channels == 1) return to_luminance(image);
  if (channels == 3 && image.channels() == 1) {
    Image out(image.height(), image.width(), 3);
    for (int c = 0; c < 3; ++c)
      std::copy(image.values().begin(), image.values().end(), out.pixels().begin() + std::ptrdiff_t(c) * image.size());
    return out;
  }
  throw ShapeError("unsupported channel conversion");
}

}  // namespace reed
