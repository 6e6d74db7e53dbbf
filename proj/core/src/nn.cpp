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

#include "reed/nn.hpp"

#include <Eigen/Core>
#include <cmath>

namespace reed {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

struct Geometry {
  int channels;       // channels of the spatial image the window runs over
  int height, width;  // size of that image
  int kernel, stride, pad;
  int out_h, out_w;   // number of window positions
  int positions() const { return out_h * out_w; }
  int rows() const { return channels * kernel * kernel; }
};

// Window matrix [channels*k*k, batch*positions] of a batch of images.
template <typename T>
void im2col(const T* src, int batch, const Geometry& g, T* cols) {
  const int P = g.positions();
  const std::size_t ncols = std::size_t(batch) * P;
  const std::size_t plane = std::size_t(g.height) * g.width;
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        T* row = cols + (std::size_t(c * g.kernel + ky) * g.kernel + kx) * ncols;
        for (int n = 0; n < batch; ++n) {
          const T* img = src + (std::size_t(n) * g.channels + c) * plane;
          T* out = row + std::size_t(n) * P;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.height) {
              std::fill(out + oy * g.out_w, out + (oy + 1) * g.out_w, T(0));
              continue;
            }
            const T* line = img + std::size_t(iy) * g.width;
            for (int ox = 0; ox < g.out_w; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              out[oy * g.out_w + ox] = (ix >= 0 && ix < g.width) ? line[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds the window matrix back into images.
template <typename T>
void col2im(const T* cols, int batch, const Geometry& g, T* dst) {
  const int P = g.positions();
  const std::size_t ncols = std::size_t(batch) * P;
  const std::size_t plane = std::size_t(g.height) * g.width;
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const T* row = cols + (std::size_t(c * g.kernel + ky) * g.kernel + kx) * ncols;
        for (int n = 0; n < batch; ++n) {
          T* img = dst + (std::size_t(n) * g.channels + c) * plane;
          const T* in = row + std::size_t(n) * P;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= g.height) continue;
            T* line = img + std::size_t(iy) * g.width;
            for (int ox = 0; ox < g.out_w; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              if (ix >= 0 && ix < g.width) line[ix] += in[oy * g.out_w + ox];
            }
          }
        }
      }
    }
  }
}

// NCHW <-> channel-major [C, N*P] matrices.
template <typename T>
void to_channel_major(const BasicTensor<T>& x, T* out) {
  const int P = x.h() * x.w();
  const std::size_t ncols = std::size_t(x.n()) * P;
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const T* src = x.data() + (std::size_t(n) * x.c() + c) * P;
      std::copy(src, src + P, out + c * ncols + std::size_t(n) * P);
    }
}

template <typename T>
void from_channel_major(const T* in, BasicTensor<T>& x) {
  const int P = x.h() * x.w();
  const std::size_t ncols = std::size_t(x.n()) * P;
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      T* dst = x.data() + (std::size_t(n) * x.c() + c) * P;
      const T* src = in + c * ncols + std::size_t(n) * P;
      std::copy(src, src + P, dst);
    }
}

Geometry conv_geometry(const LayerSpec& l, int h, int w) {
  Geometry g{l.in_channels, h, w, l.kernel, l.stride, l.pad, 0, 0};
  g.out_h = (h + 2 * l.pad - l.kernel) / l.stride + 1;
  g.out_w = (w + 2 * l.pad - l.kernel) / l.stride + 1;
  return g;
}

// A transposed convolution of an (ih, iw) input is the adjoint of a
// convolution over the (oh, ow) output whose window positions are the
// input pixels.
Geometry conv_transpose_geometry(const LayerSpec& l, int ih, int iw) {
  const int oh = (ih - 1) * l.stride - 2 * l.pad + l.kernel;
  const int ow = (iw - 1) * l.stride - 2 * l.pad + l.kernel;
  return Geometry{l.out_channels, oh, ow, l.kernel, l.stride, l.pad, ih, iw};
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void apply_activation(Nonlinearity kind, const BasicTensor<T>& x, BasicTensor<T>& y) {
  const T* in = x.data();
  T* out = y.data();
  const std::size_t n = x.size();
  switch (kind) {
    case Nonlinearity::kReLU:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0 ? in[i] : T(0);
      break;
    case Nonlinearity::kLeakyReLU:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0 ? in[i] : T(0.2) * in[i];
      break;
    case Nonlinearity::kSiLU:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * sigmoid(in[i]);
      break;
  }
}

template <typename T>
void activation_backward(Nonlinearity kind, const BasicTensor<T>& x, const BasicTensor<T>& g, BasicTensor<T>& dx) {
  const T* in = x.data();
  const T* go = g.data();
  T* out = dx.data();
  const std::size_t n = x.size();
  switch (kind) {
    case Nonlinearity::kReLU:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0 ? go[i] : T(0);
      break;
    case Nonlinearity::kLeakyReLU:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0 ? go[i] : T(0.2) * go[i];
      break;
    case Nonlinearity::kSiLU:
      for (std::size_t i = 0; i < n; ++i) {
        const T s = sigmoid(in[i]);
        out[i] = go[i] * s * (T(1) + in[i] * (T(1) - s));
      }
      break;
  }
}

bool has_params(const LayerSpec& l) { return l.kind == LayerKind::kConv || l.kind == LayerKind::kConvTranspose; }

}  // namespace

Nonlinearity parse_nonlinearity(const std::string& name) {
  if (name == "relu") return Nonlinearity::kReLU;
  if (name == "leaky_relu") return Nonlinearity::kLeakyReLU;
  if (name == "silu") return Nonlinearity::kSiLU;
  throw ConfigError("unknown nonlinearity '" + name + "' (expected relu, leaky_relu or silu)");
}

std::string to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::kReLU: return "relu";
    case Nonlinearity::kLeakyReLU: return "leaky_relu";
    case Nonlinearity::kSiLU: return "silu";
  }
  return "silu";
}

LayerSpec LayerSpec::conv(int in, int out, int kernel, int stride, int pad) {
  return LayerSpec{LayerKind::kConv, in, out, kernel, stride, pad, Nonlinearity::kSiLU};
}
LayerSpec LayerSpec::conv_transpose(int in, int out, int kernel, int stride, int pad) {
  return LayerSpec{LayerKind::kConvTranspose, in, out, kernel, stride, pad, Nonlinearity::kSiLU};
}
LayerSpec LayerSpec::activation(Nonlinearity n) {
  LayerSpec l;
  l.kind = LayerKind::kActivation;
  l.nonlinearity = n;
  return l;
}
LayerSpec LayerSpec::sigmoid() {
  LayerSpec l;
  l.kind = LayerKind::kSigmoid;
  return l;
}

std::size_t parameter_count(const ParamSet<float>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

Network::Network(std::string prefix, std::vector<LayerSpec> layers)
    : prefix_(std::move(prefix)), layers_(std::move(layers)) {
  int next = 0;
  for (const auto& l : layers_) {
    if (has_params(l)) {
      if (l.in_channels <= 0 || l.out_channels <= 0 || l.kernel <= 0 || l.stride <= 0 || l.pad < 0)
        throw ConfigError("invalid convolution layer in " + prefix_);
      param_index_.push_back(next);
      next += 2;
    } else {
      param_index_.push_back(-1);
    }
  }
}

ParamSet<float> Network::param_layout() const {
  ParamSet<float> params;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (!has_params(l)) continue;
    const std::string base = prefix_ + "." + std::to_string(i);
    std::vector<int> wshape = l.kind == LayerKind::kConv
                                  ? std::vector<int>{l.out_channels, l.in_channels, l.kernel, l.kernel}
                                  : std::vector<int>{l.in_channels, l.out_channels, l.kernel, l.kernel};
    const std::size_t wsize = std::size_t(l.in_channels) * l.out_channels * l.kernel * l.kernel;
    params.push_back({base + ".weight", wshape, std::vector<float>(wsize, 0.0f)});
    params.push_back({base + ".bias", {l.out_channels}, std::vector<float>(l.out_channels, 0.0f)});
  }
  return params;
}

ParamSet<float> Network::init_params(Rng& rng) const {
  ParamSet<float> params = param_layout();
  std::size_t slot = 0;
  for (const auto& l : layers_) {
    if (!has_params(l)) continue;
    double fan_in = double(l.in_channels) * l.kernel * l.kernel;
    if (l.kind == LayerKind::kConvTranspose) fan_in /= double(l.stride) * l.stride;
    const double bound = 1.0 / std::sqrt(fan_in);
    for (auto& v : params[slot].value) v = float(rng.uniform(-bound, bound));
    for (auto& v : params[slot + 1].value) v = float(rng.uniform(-bound, bound));
    slot += 2;
  }
  return params;
}

Shape4 Network::output_shape(Shape4 s) const {
  for (const auto& l : layers_) {
    if (l.kind == LayerKind::kConv) {
      if (s.c != l.in_channels) throw ShapeError("conv expects " + std::to_string(l.in_channels) + " channels");
      const Geometry g = conv_geometry(l, s.h, s.w);
      if (g.out_h <= 0 || g.out_w <= 0) throw ShapeError("input too small for convolution");
      s = {s.n, l.out_channels, g.out_h, g.out_w};
    } else if (l.kind == LayerKind::kConvTranspose) {
      if (s.c != l.in_channels) throw ShapeError("transposed conv expects " + std::to_string(l.in_channels) + " channels");
      const Geometry g = conv_transpose_geometry(l, s.h, s.w);
      s = {s.n, l.out_channels, g.height, g.width};
    }
  }
  return s;
}

template <typename T>
BasicTensor<T> Network::forward(const ParamSet<T>& params, const BasicTensor<T>& input, std::type_identity_t<Tape<T>>* tape) const {
  if (tape) {
    tape->clear();
    tape->inputs.reserve(layers_.size());
  }
  BasicTensor<T> x = input;
  std::vector<T> cols;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& l = layers_[li];
    BasicTensor<T> y;
    if (l.kind == LayerKind::kConv) {
      if (x.c() != l.in_channels) throw ShapeError("conv layer channel mismatch, got " + x.shape().str());
      const Geometry g = conv_geometry(l, x.h(), x.w());
      const int N = x.n();
      const std::size_t ncols = std::size_t(N) * g.positions();
      cols.resize(std::size_t(g.rows()) * ncols);
      im2col(x.data(), N, g, cols.data());
      const auto& W = params[param_index_[li]].value;
      const auto& b = params[param_index_[li] + 1].value;
      std::vector<T> out(std::size_t(l.out_channels) * ncols);
      MatMap<T>(out.data(), l.out_channels, ncols).noalias() =
          ConstMatMap<T>(W.data(), l.out_channels, g.rows()) * ConstMatMap<T>(cols.data(), g.rows(), ncols);
      for (int o = 0; o < l.out_channels; ++o)
        for (std::size_t j = 0; j < ncols; ++j) out[o * ncols + j] += b[o];
      y = BasicTensor<T>({N, l.out_channels, g.out_h, g.out_w});
      from_channel_major(out.data(), y);
    } else if (l.kind == LayerKind::kConvTranspose) {
      if (x.c() != l.in_channels) throw ShapeError("transposed conv channel mismatch, got " + x.shape().str());
      const Geometry g = conv_transpose_geometry(l, x.h(), x.w());
      const int N = x.n();
      const std::size_t ncols = std::size_t(N) * g.positions();
      std::vector<T> xin(std::size_t(l.in_channels) * ncols);
      to_channel_major(x, xin.data());
      const auto& W = params[param_index_[li]].value;
      const auto& b = params[param_index_[li] + 1].value;
      cols.resize(std::size_t(g.rows()) * ncols);
      MatMap<T>(cols.data(), g.rows(), ncols).noalias() =
          ConstMatMap<T>(W.data(), l.in_channels, g.rows()).transpose() *
          ConstMatMap<T>(xin.data(), l.in_channels, ncols);
      y = BasicTensor<T>({N, l.out_channels, g.height, g.width});
      col2im(cols.data(), N, g, y.data());
      const std::size_t plane = std::size_t(g.height) * g.width;
      for (int n = 0; n < N; ++n)
        for (int o = 0; o < l.out_channels; ++o) {
          T* p = y.data() + (std::size_t(n) * l.out_channels + o) * plane;
          for (std::size_t j = 0; j < plane; ++j) p[j] += b[o];
        }
    } else if (l.kind == LayerKind::kActivation) {
      y = BasicTensor<T>(x.shape());
      apply_activation(l.nonlinearity, x, y);
    } else {
      y = BasicTensor<T>(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    }
    if (tape) tape->inputs.push_back(std::move(x));
    x = std::move(y);
  }
  if (tape) tape->outputs.push_back(x);
  return x;
}

template <typename T>
BasicTensor<T> Network::backward(const ParamSet<T>& params, const Tape<T>& tape, const BasicTensor<T>& grad_out,
                                 ParamSet<T>* grads) const {
  if (tape.inputs.size() != layers_.size() || tape.outputs.empty())
    throw Error("backward called without a matching recorded forward pass");
  BasicTensor<T> g = grad_out;
  std::vector<T> cols;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerSpec& l = layers_[li];
    const BasicTensor<T>& x = tape.inputs[li];
    BasicTensor<T> dx(x.shape());
    if (l.kind == LayerKind::kConv) {
      const Geometry g_ = conv_geometry(l, x.h(), x.w());
      const int N = x.n();
      const std::size_t ncols = std::size_t(N) * g_.positions();
      std::vector<T> dy(std::size_t(l.out_channels) * ncols);
      to_channel_major(g, dy.data());
      const auto& W = params[param_index_[li]].value;
      cols.resize(std::size_t(g_.rows()) * ncols);
      if (grads) {
        im2col(x.data(), N, g_, cols.data());
        auto& dW = (*grads)[param_index_[li]].value;
        auto& db = (*grads)[param_index_[li] + 1].value;
        MatMap<T>(dW.data(), l.out_channels, g_.rows()).noalias() +=
            ConstMatMap<T>(dy.data(), l.out_channels, ncols) *
            ConstMatMap<T>(cols.data(), g_.rows(), ncols).transpose();
        for (int o = 0; o < l.out_channels; ++o) {
          T s = 0;
          for (std::size_t j = 0; j < ncols; ++j) s += dy[o * ncols + j];
          db[o] += s;
        }
      }
      MatMap<T>(cols.data(), g_.rows(), ncols).noalias() =
          ConstMatMap<T>(W.data(), l.out_channels, g_.rows()).transpose() *
          ConstMatMap<T>(dy.data(), l.out_channels, ncols);
      col2im(cols.data(), N, g_, dx.data());
    } else if (l.kind == LayerKind::kConvTranspose) {
      const Geometry g_ = conv_transpose_geometry(l, x.h(), x.w());
      const int N = x.n();
      const std::size_t ncols = std::size_t(N) * g_.positions();
      cols.resize(std::size_t(g_.rows()) * ncols);
      im2col(g.data(), N, g_, cols.data());
      const auto& W = params[param_index_[li]].value;
      if (grads) {
        std::vector<T> xin(std::size_t(l.in_channels) * ncols);
        to_channel_major(x, xin.data());
        auto& dW = (*grads)[param_index_[li]].value;
        auto& db = (*grads)[param_index_[li] + 1].value;
        MatMap<T>(dW.data(), l.in_channels, g_.rows()).noalias() +=
            ConstMatMap<T>(xin.data(), l.in_channels, ncols) *
            ConstMatMap<T>(cols.data(), g_.rows(), ncols).transpose();
        const std::size_t plane = std::size_t(g_.height) * g_.width;
        for (int n = 0; n < N; ++n)
          for (int o = 0; o < l.out_channels; ++o) {
            const T* p = g.data() + (std::size_t(n) * l.out_channels + o) * plane;
            T s = 0;
            for (std::size_t j = 0; j < plane; ++j) s += p[j];
            db[o] += s;
          }
      }
      std::vector<T> dxin(std::size_t(l.in_channels) * ncols);
      MatMap<T>(dxin.data(), l.in_channels, ncols).noalias() =
          ConstMatMap<T>(W.data(), l.in_channels, g_.rows()) * ConstMatMap<T>(cols.data(), g_.rows(), ncols);
      from_channel_major(dxin.data(), dx);
    } else if (l.kind == LayerKind::kActivation) {
      activation_backward(l.nonlinearity, x, g, dx);
    } else {
      const BasicTensor<T>& y = li + 1 < layers_.size() ? tape.inputs[li + 1] : tape.outputs.back();
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] = g[i] * y[i] * (T(1) - y[i]);
    }
    g = std::move(dx);
  }
  return g;
}

template BasicTensor<float> Network::forward(const ParamSet<float>&, const BasicTensor<float>&, Tape<float>*) const;
template BasicTensor<double> Network::forward(const ParamSet<double>&, const BasicTensor<double>&,
                                             Tape<double>*) const;
template BasicTensor<float> Network::backward(const ParamSet<float>&, const Tape<float>&, const BasicTensor<float>&,
                                              ParamSet<float>*) const;
template BasicTensor<double> Network::backward(const ParamSet<double>&, const Tape<double>&,
                                               const BasicTensor<double>&, ParamSet<double>*) const;

void Adam::step(ParamSet<float>& params, const ParamSet<float>& grads) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].value.size(), 0.0);
      v_[i].assign(params[i].value.size(), 0.0);
    }
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = b1 > 0 ? 1.0 - std::pow(b1, double(t_)) : 1.0;
  const double c2 = 1.0 - std::pow(b2, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    const auto& g = grads[i].value;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * double(g[j]) * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] = float(p[j] - options_.learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon));
    }
  }
}

}  // namespace reed
