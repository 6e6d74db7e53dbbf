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

#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "reed/random.hpp"
#include "reed/tensor.hpp"

namespace reed {

enum class LayerKind { kConv, kConvTranspose, kActivation, kSigmoid };
enum class Nonlinearity { kReLU, kLeakyReLU, kSiLU };

Nonlinearity parse_nonlinearity(const std::string& name);
std::string to_string(Nonlinearity n);

struct LayerSpec {
  LayerKind kind = LayerKind::kActivation;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  Nonlinearity nonlinearity = Nonlinearity::kSiLU;

  static LayerSpec conv(int in, int out, int kernel, int stride, int pad);
  static LayerSpec conv_transpose(int in, int out, int kernel, int stride, int pad);
  static LayerSpec activation(Nonlinearity n);
  static LayerSpec sigmoid();
};

template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
};

template <typename T>
using ParamSet = std::vector<Parameter<T>>;

std::size_t parameter_count(const ParamSet<float>& params);

template <typename T>
ParamSet<T> zeros_like(const ParamSet<T>& params) {
  ParamSet<T> out = params;
  for (auto& p : out) std::fill(p.value.begin(), p.value.end(), T(0));
  return out;
}

template <typename U, typename T>
ParamSet<U> cast_params(const ParamSet<T>& params) {
  ParamSet<U> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p.name, p.shape, std::vector<U>(p.value.begin(), p.value.end())});
  return out;
}

// Activations retained by a forward pass for the matching backward pass.
template <typename T>
struct Tape {
  std::vector<BasicTensor<T>> inputs;
  std::vector<BasicTensor<T>> outputs;
  void clear() {
    inputs.clear();
    outputs.clear();
  }
};

// A feed-forward stack of convolutions and pointwise nonlinearities.
// Convolution weights use the (out, in, k, k) layout; transposed
// convolution weights use (in, out, k, k).
class Network {
 public:
  Network() = default;
  Network(std::string prefix, std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  ParamSet<float> init_params(Rng& rng) const;
  // Parameter names and shapes implied by the layer list.
  ParamSet<float> param_layout() const;

  Shape4 output_shape(Shape4 input) const;

  // When tape is non-null the pass records what backward() needs.
  template <typename T>
  BasicTensor<T> forward(const ParamSet<T>& params, const BasicTensor<T>& x, std::type_identity_t<Tape<T>>* tape) const;

  // Accumulates parameter gradients into grads (if non-null) and returns
  // the gradient with respect to the network input.
  template <typename T>
  BasicTensor<T> backward(const ParamSet<T>& params, const Tape<T>& tape, const BasicTensor<T>& grad_out,
                          ParamSet<T>* grads) const;

 private:
  std::string prefix_;
  std::vector<LayerSpec> layers_;
  std::vector<int> param_index_;  // first parameter slot of each layer, -1 if none
};

// Adaptive first-order optimizer. With beta1 = 0 (the default) the update
// has no momentum and reduces to bias-corrected RMSProp.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.0;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam() = default;
  explicit Adam(Options options) : options_(options) {}

  void step(ParamSet<float>& params, const ParamSet<float>& grads);
  long steps() const { return t_; }

 private:
  Options options_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace reed
