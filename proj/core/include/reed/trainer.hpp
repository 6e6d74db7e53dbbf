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
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "reed/curriculum.hpp"
#include "reed/data.hpp"
#include "reed/losses.hpp"
#include "reed/nn.hpp"
#include "reed/vae.hpp"

namespace reed {

struct ModeFlags {
  bool iterative_training = true;
  bool first_step_loss = true;
  bool dynamic_incrementation = true;
  bool freeze_encoder = true;

  bool operator==(const ModeFlags&) const = default;
};

struct TrainConfig {
  ArchConfig arch;  // used when training starts from random weights
  int epochs_max = 40;
  int k_init = 4;
  int k_max = 20;
  int plateau_patience = 5;
  double plateau_tolerance = 1e-5;
  int static_k = 5;  // k when iterative training is on and the curriculum is off
  LossWeights weights;
  double learning_rate = 2e-4;  // the first-step loss drifts toward high-frequency noise at 1e-3
  double adam_beta1 = 0.0;
  int batch_size = 16;
  std::uint64_t seed = 0;
  ModeFlags flags;

  // Throws ConfigError; also rejects the curriculum without iterative training.
  void validate() const;
  CurriculumPolicy curriculum() const { return {k_init, k_max, plateau_patience, plateau_tolerance}; }
  // k used for the first epoch.
  int initial_k() const;
  bool operator==(const TrainConfig&) const = default;
};

// Single-step VAE training from scratch: every REED component off, encoder
// trainable, and a small KL weight so the posterior does not collapse at
// desk scale.
TrainConfig vanilla_pretrain_config();

CurriculumState update_curriculum(const CurriculumState& state, double val_loss, const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  int k = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
};

struct RunLog {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  CurriculumState final_curriculum;
  std::string final_checkpoint_id;
  bool terminated_by_curriculum = false;
};

// One JSON object per epoch, preceded by a config record.
void write_runlog(const RunLog& log, const std::filesystem::path& path);

// The detached part of one training rollout: x^0, x^1 and x^{k-1}.
template <typename T>
struct Rollout {
  int k = 1;
  BasicTensor<T> x0;
  BasicTensor<T> x1;      // empty when k == 1 (x^1 is the differentiable output then)
  BasicTensor<T> x_prev;  // input of the final, differentiable iteration
};

// Runs the first k-1 encode-sample-decode iterations without recording
// anything for backpropagation.
template <typename T>
Rollout<T> rollout_prefix(const BasicModel<T>& model, const BasicTensor<T>& x0, int k, Rng& rng);

template <typename T>
struct StepGradients {
  LossTerms terms;
  ParamSet<T> encoder;  // empty when the encoder is not trainable
  ParamSet<T> decoder;
  BasicTensor<T> output;  // x^k
};

// Loss and gradients of the final iteration x^k = D(mu + sigma * noise),
// (mu, sigma) = E(x^{k-1}). Earlier iterates are constants. The KL term
// uses the posterior that produced x^k.
template <typename T>
StepGradients<T> final_iteration_gradients(const BasicModel<T>& model, const Rollout<T>& rollout,
                                           const TrainConfig& config, const BasicTensor<T>& noise);

// Same forward computation without gradients; used by finite-difference
// checks.
template <typename T>
LossTerms final_iteration_loss(const BasicModel<T>& model, const Rollout<T>& rollout, const TrainConfig& config,
                               const BasicTensor<T>& noise);

struct OptimizerState {
  Adam encoder;
  Adam decoder;
};

OptimizerState make_optimizer(const TrainConfig& config);

// One gradient step on a batch with k iterations. Only trainable parameters
// change. Throws TrainingDiverged on a non-finite loss or gradient.
double train_step(ModelParameters& model, const Tensor& batch, int k, const TrainConfig& config, Rng& rng,
                  OptimizerState& optimizer);

// mse(x0, x^k) + alpha * perceptual(x0, x^k) averaged over the set, with
// posterior means for the k iterations.
double validation_loss(const ModelParameters& model, const Dataset& val_set, int k, double alpha);

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
};

std::pair<ModelParameters, RunLog> pretrain_vanilla(const TrainConfig& config, const Dataset& train_set,
                                                    const Dataset& val_set, const TrainCallbacks& callbacks = {});

std::pair<ModelParameters, RunLog> reed_train(const TrainConfig& config, const ModelParameters& init,
                                              const Dataset& train_set, const Dataset& val_set,
                                              const TrainCallbacks& callbacks = {});

}  // namespace reed
