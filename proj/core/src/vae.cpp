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

#include "reed/vae.hpp"

#include <algorithm>
#include <cmath>

namespace reed {

int ArchConfig::latent_spatial() const {
  if (conv_widths.size() >= 31) return 0;
  return image_size >> conv_widths.size();
}

void ArchConfig::validate() const {
  if (image_size < Image::kMinSide) throw ConfigError("arch.image_size must be >= 8");
  if (channels != 1 && channels != 3) throw ConfigError("arch.channels must be 1 or 3");
  if (latent_channels < 1) throw ConfigError("arch.latent_channels must be >= 1");
  if (conv_widths.empty()) throw ConfigError("arch.conv_widths must not be empty");
  if (refine_convs < 0) throw ConfigError("arch.refine_convs must be >= 0");
  for (int w : conv_widths)
    if (w < 1) throw ConfigError("arch.conv_widths entries must be positive");
  const int factor = 1 << conv_widths.size();
  if (image_size % factor != 0 || latent_spatial() < 1)
    throw ConfigError("arch.image_size must be divisible by 2^len(conv_widths)");
  if (latent_dim() >= pixel_dim())
    throw ConfigError("latent dimensionality " + std::to_string(latent_dim()) +
                      " is not smaller than pixel dimensionality " + std::to_string(pixel_dim()));
  parse_nonlinearity(nonlinearity);
}

Network build_encoder(const ArchConfig& arch) {
  const Nonlinearity act = parse_nonlinearity(arch.nonlinearity);
  std::vector<LayerSpec> layers;
  int in = arch.channels;
  for (int w : arch.conv_widths) {
    layers.push_back(LayerSpec::conv(in, w, 4, 2, 1));
    layers.push_back(LayerSpec::activation(act));
    for (int r = 0; r < arch.refine_convs; ++r) {
      layers.push_back(LayerSpec::conv(w, w, 3, 1, 1));
      layers.push_back(LayerSpec::activation(act));
    }
    in = w;
  }
  layers.push_back(LayerSpec::conv(in, 2 * arch.latent_channels, 3, 1, 1));
  return Network("encoder", std::move(layers));
}

Network build_decoder(const ArchConfig& arch) {
  const Nonlinearity act = parse_nonlinearity(arch.nonlinearity);
  std::vector<LayerSpec> layers;
  const auto& widths = arch.conv_widths;
  auto refine = [&](int w) {
    for (int r = 0; r < arch.refine_convs; ++r) {
      layers.push_back(LayerSpec::conv(w, w, 3, 1, 1));
      layers.push_back(LayerSpec::activation(act));
    }
  };
  layers.push_back(LayerSpec::conv(arch.latent_channels, widths.back(), 3, 1, 1));
  layers.push_back(LayerSpec::activation(act));
  refine(widths.back());
  for (std::size_t i = widths.size() - 1; i > 0; --i) {
    layers.push_back(LayerSpec::conv_transpose(widths[i], widths[i - 1], 4, 2, 1));
    layers.push_back(LayerSpec::activation(act));
    refine(widths[i - 1]);
  }
  if (arch.refine_convs > 0) {
    // Upsample into a narrow full-resolution stage and project to pixels.
    const int w = std::max(8, widths.front() / 2);
    layers.push_back(LayerSpec::conv_transpose(widths.front(), w, 4, 2, 1));
    layers.push_back(LayerSpec::activation(act));
    layers.push_back(LayerSpec::conv(w, arch.channels, 3, 1, 1));
  } else {
    layers.push_back(LayerSpec::conv_transpose(widths.front(), arch.channels, 4, 2, 1));
  }
  layers.push_back(LayerSpec::sigmoid());
  return Network("decoder", std::move(layers));
}

ModelParameters init_model(const ArchConfig& arch) {
  arch.validate();
  ModelParameters m;
  m.arch = arch;
  m.encoder_net = build_encoder(arch);
  m.decoder_net = build_decoder(arch);
  Rng rng(arch.seed);
  Rng enc_rng = rng.fork(1);
  Rng dec_rng = rng.fork(2);
  m.encoder = m.encoder_net.init_params(enc_rng);
  m.decoder = m.decoder_net.init_params(dec_rng);
  m.encoder_trainable = true;
  m.latent_channels = arch.latent_channels;
  return m;
}

template <typename T>
LatentDistribution<T> split_latent(const BasicTensor<T>& out, int lc) {
  if (out.c() != 2 * lc) throw ShapeError("encoder output has " + std::to_string(out.c()) + " channels, expected " +
                                          std::to_string(2 * lc));
  const Shape4 s{out.n(), lc, out.h(), out.w()};
  LatentDistribution<T> d{BasicTensor<T>(s), BasicTensor<T>(s)};
  const std::size_t plane = std::size_t(lc) * out.h() * out.w();
  for (int n = 0; n < out.n(); ++n) {
    const T* src = out.item(n).data();
    std::copy(src, src + plane, d.mean.item(n).data());
    T* lv = d.log_variance.item(n).data();
    for (std::size_t j = 0; j < plane; ++j) lv[j] = std::clamp(src[plane + j], T(kLogVarMin), T(kLogVarMax));
  }
  return d;
}

template <typename T>
BasicTensor<T> merge_latent_grad(const BasicTensor<T>& d_mean, const BasicTensor<T>& d_lv, const BasicTensor<T>& out,
                                 int lc) {
  BasicTensor<T> g(out.shape());
  const std::size_t plane = std::size_t(lc) * out.h() * out.w();
  for (int n = 0; n < out.n(); ++n) {
    const T* raw = out.item(n).data() + plane;
    T* dst = g.item(n).data();
    std::copy(d_mean.item(n).begin(), d_mean.item(n).end(), dst);
    const T* dl = d_lv.item(n).data();
    for (std::size_t j = 0; j < plane; ++j) {
      const bool inside = raw[j] >= T(kLogVarMin) && raw[j] <= T(kLogVarMax);
      dst[plane + j] = inside ? dl[j] : T(0);
    }
  }
  return g;
}

template <typename T>
LatentDistribution<T> encode(const BasicModel<T>& model, const BasicTensor<T>& batch) {
  if (batch.c() != model.arch.channels || batch.h() != model.arch.image_size || batch.w() != model.arch.image_size)
    throw ShapeError("encode: image batch " + batch.shape().str() + " does not match model input " +
                     model.image_shape(batch.n()).str());
  return split_latent(model.encoder_net.forward(model.encoder, batch, nullptr), model.latent_channels);
}

LatentDistribution<float> encode(const ModelParameters& model, const Image& image) {
  return encode(model, stack(std::span<const Image>(&image, 1)));
}

template <typename T>
LatentCode<T> sample_latent(const LatentDistribution<T>& dist, Rng& rng, BasicTensor<T>* noise) {
  require_same_shape(dist.mean, dist.log_variance, "sample_latent");
  LatentCode<T> z{BasicTensor<T>(dist.mean.shape())};
  if (noise) *noise = BasicTensor<T>(dist.mean.shape());
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    const T eps = T(rng.normal());
    if (noise) (*noise)[i] = eps;
    z.values[i] = dist.mean[i] + std::exp(dist.log_variance[i] / T(2)) * eps;
  }
  return z;
}

template <typename T>
LatentCode<T> latent_mean(const LatentDistribution<T>& dist) {
  return LatentCode<T>{dist.mean};
}

template <typename T>
BasicTensor<T> decode(const BasicModel<T>& model, const LatentCode<T>& code) {
  const int s = model.arch.latent_spatial();
  const auto& v = code.values;
  if (v.c() != model.latent_channels || v.h() != s || v.w() != s)
    throw ShapeError("decode: latent " + v.shape().str() + " does not match model latent geometry");
  return model.decoder_net.forward(model.decoder, v, nullptr);
}

template <typename T>
double kl_standard_normal(const LatentDistribution<T>& dist) {
  require_same_shape(dist.mean, dist.log_variance, "kl_standard_normal");
  if (dist.mean.n() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.mean.size(); ++i) {
    const double mu = dist.mean[i];
    const double lv = dist.log_variance[i];
    sum += mu * mu + std::exp(lv) - 1.0 - lv;
  }
  return 0.5 * sum / dist.mean.n();
}

template LatentDistribution<float> split_latent(const BasicTensor<float>&, int);
template LatentDistribution<double> split_latent(const BasicTensor<double>&, int);
template BasicTensor<float> merge_latent_grad(const BasicTensor<float>&, const BasicTensor<float>&,
                                              const BasicTensor<float>&, int);
template BasicTensor<double> merge_latent_grad(const BasicTensor<double>&, const BasicTensor<double>&,
                                               const BasicTensor<double>&, int);
template LatentDistribution<float> encode(const BasicModel<float>&, const BasicTensor<float>&);
template LatentDistribution<double> encode(const BasicModel<double>&, const BasicTensor<double>&);
template LatentCode<float> sample_latent(const LatentDistribution<float>&, Rng&, BasicTensor<float>*);
template LatentCode<double> sample_latent(const LatentDistribution<double>&, Rng&, BasicTensor<double>*);
template LatentCode<float> latent_mean(const LatentDistribution<float>&);
template LatentCode<double> latent_mean(const LatentDistribution<double>&);
template BasicTensor<float> decode(const BasicModel<float>&, const LatentCode<float>&);
template BasicTensor<double> decode(const BasicModel<double>&, const LatentCode<double>&);
template double kl_standard_normal(const LatentDistribution<float>&);
template double kl_standard_normal(const LatentDistribution<double>&);

std::string LatentMode::str() const {
  return kind == Kind::kMean ? "mean" : "sample:" + std::to_string(seed);
}

LatentDistribution<float> VaeCodec::encode(const Tensor& batch) const { return reed::encode(model_, batch); }
Tensor VaeCodec::decode(const LatentCode<float>& code) const { return reed::decode(model_, code); }

LatentDistribution<float> IdentityCodec::encode(const Tensor& batch) const {
  return {batch, Tensor(batch.shape(), float(kLogVarMin))};
}
Tensor IdentityCodec::decode(const LatentCode<float>& code) const { return code.values; }

void iterate_batch(const Codec& codec, const Tensor& batch, int n, LatentMode mode,
                   const std::function<void(const Tensor&, int)>& on_iterate, const IterateHook& hook) {
  if (n < 1) throw ConfigError("number of encode-decode iterations must be >= 1");
  Rng rng(mode.seed);
  Tensor x = batch;
  for (int i = 1; i <= n; ++i) {
    const LatentDistribution<float> dist = codec.encode(x);
    const LatentCode<float> z = mode.kind == LatentMode::Kind::kMean ? latent_mean(dist) : sample_latent(dist, rng);
    Tensor next = codec.decode(z);
    if (next.shape() != batch.shape()) throw ShapeError("codec changed the image shape");
    if (hook) hook(next, i);
    if (on_iterate) on_iterate(next, i);
    x = std::move(next);
  }
}

std::vector<Image> encode_decode_iterate(const Codec& codec, const Image& image, int n, LatentMode mode) {
  std::vector<Image> out;
  out.reserve(std::max(n, 0));
  iterate_batch(codec, stack(std::span<const Image>(&image, 1)), n, mode,
                [&](const Tensor& x, int) { out.push_back(unstack(x, 0)); });
  return out;
}

std::vector<Image> encode_decode_iterate(const ModelParameters& model, const Image& image, int n, LatentMode mode) {
  return encode_decode_iterate(VaeCodec(model), image, n, mode);
}

}  // namespace reed
