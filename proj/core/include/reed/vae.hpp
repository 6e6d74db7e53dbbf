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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reed/image.hpp"
#include "reed/nn.hpp"
#include "reed/random.hpp"

namespace reed {

inline constexpr double kLogVarMin = -30.0;
inline constexpr double kLogVarMax = 20.0;

// Convolutional VAE geometry. The encoder halves the resolution once per
// entry of conv_widths, so the latent grid is image_size / 2^len(widths).
struct ArchConfig {
  int image_size = 32;
  int channels = 3;
  int latent_channels = 8;
  std::vector<int> conv_widths{32};
  std::string nonlinearity = "silu";
  int refine_convs = 0;  // extra 3x3 conv + activation per resolution level
  std::uint64_t seed = 0;

  int latent_spatial() const;
  std::size_t pixel_dim() const { return std::size_t(image_size) * image_size * channels; }
  std::size_t latent_dim() const {
    return std::size_t(latent_spatial()) * latent_spatial() * latent_channels;
  }
  // Throws ConfigError when the geometry is inconsistent or not lossy.
  void validate() const;
  bool operator==(const ArchConfig&) const = default;
};

Network build_encoder(const ArchConfig& arch);
Network build_decoder(const ArchConfig& arch);

// Encoder and decoder weights plus the trainability flag of the encoder.
// The encoder network emits 2 * latent_channels maps: means then
// log-variances.
template <typename T>
struct BasicModel {
  ArchConfig arch;
  Network encoder_net;
  Network decoder_net;
  ParamSet<T> encoder;
  ParamSet<T> decoder;
  bool encoder_trainable = true;
  int latent_channels = 0;

  Shape4 image_shape(int n) const { return {n, arch.channels, arch.image_size, arch.image_size}; }
};

using ModelParameters = BasicModel<float>;

template <typename U, typename T>
BasicModel<U> cast_model(const BasicModel<T>& m) {
  return BasicModel<U>{m.arch,
                       m.encoder_net,
                       m.decoder_net,
                       cast_params<U>(m.encoder),
                       cast_params<U>(m.decoder),
                       m.encoder_trainable,
                       m.latent_channels};
}

ModelParameters init_model(const ArchConfig& arch);

template <typename T>
struct LatentDistribution {
  BasicTensor<T> mean;
  BasicTensor<T> log_variance;
};

template <typename T>
struct LatentCode {
  BasicTensor<T> values;
};

// Splits raw encoder output into mean and clamped log-variance.
template <typename T>
LatentDistribution<T> split_latent(const BasicTensor<T>& encoder_out, int latent_channels);
// Inverse of split_latent for gradients; log-variance gradients are zeroed
// where the clamp was active.
template <typename T>
BasicTensor<T> merge_latent_grad(const BasicTensor<T>& d_mean, const BasicTensor<T>& d_log_variance,
                                 const BasicTensor<T>& encoder_out, int latent_channels);

template <typename T>
LatentDistribution<T> encode(const BasicModel<T>& model, const BasicTensor<T>& batch);
LatentDistribution<float> encode(const ModelParameters& model, const Image& image);

// z = mean + exp(log_variance / 2) * eps. When noise is non-null it
// receives eps.
template <typename T>
LatentCode<T> sample_latent(const LatentDistribution<T>& dist, Rng& rng, BasicTensor<T>* noise = nullptr);
template <typename T>
LatentCode<T> latent_mean(const LatentDistribution<T>& dist);

template <typename T>
BasicTensor<T> decode(const BasicModel<T>& model, const LatentCode<T>& code);

// 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2), summed over latent elements
// and averaged over the batch.
template <typename T>
double kl_standard_normal(const LatentDistribution<T>& dist);

struct LatentMode {
  enum class Kind { kMean, kSample };
  Kind kind = Kind::kMean;
  std::uint64_t seed = 0;

  static LatentMode mean() { return {}; }
  static LatentMode sample(std::uint64_t seed) { return {Kind::kSample, seed}; }
  std::string str() const;
};

// Anything that maps pixels to a latent distribution and codes back to
// pixels. Evaluation and iteration are written against this so test
// doubles can stand in for a trained model.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual LatentDistribution<float> encode(const Tensor& batch) const = 0;
  virtual Tensor decode(const LatentCode<float>& code) const = 0;
};

class VaeCodec final : public Codec {
 public:
  explicit VaeCodec(const ModelParameters& model) : model_(model) {}
  LatentDistribution<float> encode(const Tensor& batch) const override;
  Tensor decode(const LatentCode<float>& code) const override;

 private:
  const ModelParameters& model_;
};

// Lossless: the latent is the pixel array itself with log-variance at the
// lower clamp.
class IdentityCodec final : public Codec {
 public:
  LatentDistribution<float> encode(const Tensor& batch) const override;
  Tensor decode(const LatentCode<float>& code) const override;
};

// Called after every decode with the 1-based iteration index; may modify
// the iterate in place before it is re-encoded.
using IterateHook = std::function<void(Tensor& iterate, int iteration)>;

// Runs n encode-decode iterations on a batch, invoking on_iterate with
// each x^i (after the hook, if any).
void iterate_batch(const Codec& codec, const Tensor& batch, int n, LatentMode mode,
                   const std::function<void(const Tensor&, int)>& on_iterate, const IterateHook& hook = {});

// [x^1, ..., x^n] with x^{i+1} = decode(latent(encode(x^i))).
std::vector<Image> encode_decode_iterate(const Codec& codec, const Image& image, int n, LatentMode mode);
std::vector<Image> encode_decode_iterate(const ModelParameters& model, const Image& image, int n, LatentMode mode);

}  // namespace reed
