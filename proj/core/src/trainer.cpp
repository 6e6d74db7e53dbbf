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

#include "reed/trainer.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "reed/config.hpp"

namespace reed {

void TrainConfig::validate() const {
  if (epochs_max < 0) throw ConfigError("train.epochs_max must be >= 0");
  curriculum().validate();
  if (static_k < 1) throw ConfigError("train.static_k must be >= 1");
  weights.validate();
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be > 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) throw ConfigError("train.adam_beta1 must be in [0,1)");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (flags.dynamic_incrementation && !flags.iterative_training)
    throw ConfigError("dynamic incrementation requires iterative training");
}

int TrainConfig::initial_k() const {
  if (!flags.iterative_training) return 1;
  return flags.dynamic_incrementation ? k_init : static_k;
}

TrainConfig vanilla_pretrain_config() {
  TrainConfig c;
  c.flags = ModeFlags{false, false, false, false};
  c.static_k = 1;
  // A near-deterministic posterior keeps later first-step training stable:
  // with larger weights the sampling noise lets the decoder drift toward
  // flat or noisy outputs once the encoder is frozen.
  c.weights.beta = 1e-8;
  c.learning_rate = 1e-3;
  c.adam_beta1 = 0.9;
  c.epochs_max = 30;
  return c;
}

CurriculumState update_curriculum(const CurriculumState& state, double val_loss, const TrainConfig& config) {
  return update_curriculum(state, val_loss, config.curriculum());
}

void write_runlog(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run log " + path.string());
  nlohmann::json cfg = {{"type", "config"}};
  for (const auto& [k, v] : to_key_values(log.config)) cfg["config"][k] = v;
  out << cfg.dump() << "\n";
  for (const auto& e : log.epochs) {
    // Wall times stay out of the log so reruns produce identical bytes.
    nlohmann::json j = {
        {"type", "epoch"}, {"epoch", e.epoch}, {"k", e.k}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}};
    out << j.dump() << "\n";
  }
  nlohmann::json fin = {{"type", "final"},
                        {"k", log.final_curriculum.k},
                        {"terminated_by_curriculum", log.terminated_by_curriculum},
                        {"checkpoint", log.final_checkpoint_id}};
  out << fin.dump() << "\n";
  if (!out) throw IoError("failed writing run log " + path.string());
}

template <typename T>
Rollout<T> rollout_prefix(const BasicModel<T>& model, const BasicTensor<T>& x0, int k, Rng& rng) {
  if (k < 1) throw ConfigError("k must be >= 1");
  Rollout<T> r;
  r.k = k;
  r.x0 = x0;
  BasicTensor<T> x = x0;
  for (int i = 1; i < k; ++i) {
    const auto dist = encode(model, x);
    x = decode(model, sample_latent(dist, rng));
    if (i == 1) r.x1 = x;
  }
  r.x_prev = std::move(x);
  return r;
}

namespace {

template <typename T>
struct FinalPass {
  BasicTensor<T> encoder_out;
  LatentDistribution<T> dist;
  BasicTensor<T> xk;
  Tape<T> encoder_tape;
  Tape<T> decoder_tape;
};

template <typename T>
FinalPass<T> run_final(const BasicModel<T>& model, const Rollout<T>& r, const BasicTensor<T>& noise, bool record) {
  FinalPass<T> p;
  const bool enc_tape = record && model.encoder_trainable;
  p.encoder_out = model.encoder_net.forward(model.encoder, r.x_prev, enc_tape ? &p.encoder_tape : nullptr);
  p.dist = split_latent(p.encoder_out, model.latent_channels);
  require_same_shape(p.dist.mean, noise, "final iteration noise");
  BasicTensor<T> z(p.dist.mean.shape());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = p.dist.mean[i] + std::exp(p.dist.log_variance[i] / T(2)) * noise[i];
  p.xk = model.decoder_net.forward(model.decoder, z, record ? &p.decoder_tape : nullptr);
  return p;
}

template <typename T>
const BasicTensor<T>& loss_target(const Rollout<T>& r, const BasicTensor<T>& xk, const TrainConfig& c) {
  if (!c.flags.first_step_loss) return r.x0;
  return r.k == 1 ? xk : r.x1;
}

}  // namespace

template <typename T>
LossTerms final_iteration_loss(const BasicModel<T>& model, const Rollout<T>& r, const TrainConfig& c,
                               const BasicTensor<T>& noise) {
  const FinalPass<T> p = run_final(model, r, noise, false);
  const BasicTensor<T> target = loss_target(r, p.xk, c);
  return train_loss(target, p.xk, p.dist, c.weights);
}

template <typename T>
StepGradients<T> final_iteration_gradients(const BasicModel<T>& model, const Rollout<T>& r, const TrainConfig& c,
                                           const BasicTensor<T>& noise) {
  const FinalPass<T> p = run_final(model, r, noise, true);
  // Copy: under the first-step loss with k = 1 the target aliases x^k but
  // is treated as a constant.
  const BasicTensor<T> target = loss_target(r, p.xk, c);

  StepGradients<T> g;
  g.terms = train_loss(target, p.xk, p.dist, c.weights);
  g.output = p.xk;
  g.decoder = zeros_like(model.decoder);
  const BasicTensor<T> d_xk = reconstruction_gradient(target, p.xk, c.weights.alpha);
  const BasicTensor<T> d_z = model.decoder_net.backward(model.decoder, p.decoder_tape, d_xk, &g.decoder);

  if (model.encoder_trainable) {
    BasicTensor<T> d_mean, d_lv;
    kl_gradient(p.dist, c.weights.beta, d_mean, d_lv);
    for (std::size_t i = 0; i < d_z.size(); ++i) {
      d_mean[i] += d_z[i];
      d_lv[i] += d_z[i] * noise[i] * T(0.5) * std::exp(p.dist.log_variance[i] / T(2));
    }
    const BasicTensor<T> d_out = merge_latent_grad(d_mean, d_lv, p.encoder_out, model.latent_channels);
    g.encoder = zeros_like(model.encoder);
    model.encoder_net.backward(model.encoder, p.encoder_tape, d_out, &g.encoder);
  }
  return g;
}

template Rollout<float> rollout_prefix(const BasicModel<float>&, const BasicTensor<float>&, int, Rng&);
template Rollout<double> rollout_prefix(const BasicModel<double>&, const BasicTensor<double>&, int, Rng&);
template LossTerms final_iteration_loss(const BasicModel<float>&, const Rollout<float>&, const TrainConfig&,
                                        const BasicTensor<float>&);
template LossTerms final_iteration_loss(const BasicModel<double>&, const Rollout<double>&, const TrainConfig&,
                                        const BasicTensor<double>&);
template StepGradients<float> final_iteration_gradients(const BasicModel<float>&, const Rollout<float>&,
                                                        const TrainConfig&, const BasicTensor<float>&);
template StepGradients<double> final_iteration_gradients(const BasicModel<double>&, const Rollout<double>&,
                                                         const TrainConfig&, const BasicTensor<double>&);

OptimizerState make_optimizer(const TrainConfig& c) {
  Adam::Options o;
  o.learning_rate = c.learning_rate;
  o.beta1 = c.adam_beta1;
  return {Adam(o), Adam(o)};
}

namespace {

bool all_finite(const ParamSet<float>& ps) {
  for (const auto& p : ps)
    for (float v : p.value)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

double train_step(ModelParameters& model, const Tensor& batch, int k, const TrainConfig& config, Rng& rng,
                  OptimizerState& opt) {
  const Rollout<float> r = rollout_prefix(model, batch, k, rng);
  const Shape4 lat{batch.n(), model.latent_channels, model.arch.latent_spatial(), model.arch.latent_spatial()};
  Tensor noise(lat);
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = float(rng.normal());
  const StepGradients<float> g = final_iteration_gradients(model, r, config, noise);
  if (!std::isfinite(g.terms.total) || !all_finite(g.decoder) || (model.encoder_trainable && !all_finite(g.encoder)))
    throw TrainingDiverged("training diverged: non-finite loss or gradient (loss=" + std::to_string(g.terms.total) +
                           ")");
  opt.decoder.step(model.decoder, g.decoder);
  if (model.encoder_trainable) opt.encoder.step(model.encoder, g.encoder);
  return g.terms.total;
}

double validation_loss(const ModelParameters& model, const Dataset& val_set, int k, double alpha) {
  const VaeCodec codec(model);
  double total = 0;
  const auto batches = epoch_batches(val_set.size(), 64, false, 0, 0);
  for (const auto& idx : batches) {
    std::vector<Image> imgs;
    for (auto i : idx) imgs.push_back(val_set[i]);
    const Tensor x0 = stack(imgs);
    Tensor xk;
    iterate_batch(codec, x0, k, LatentMode::mean(), [&](const Tensor& x, int i) {
      if (i == k) xk = x;
    });
    total += val_loss(x0, xk, alpha) * double(idx.size());
  }
  return total / double(val_set.size());
}

std::pair<ModelParameters, RunLog> reed_train(const TrainConfig& config, const ModelParameters& init,
                                              const Dataset& train_set, const Dataset& val_set,
                                              const TrainCallbacks& callbacks) {
  config.validate();
  ModelParameters model = init;
  model.encoder_trainable = !config.flags.freeze_encoder;
  if (train_set.channels() != model.arch.channels || train_set.height() != model.arch.image_size ||
      train_set.width() != model.arch.image_size)
    throw ShapeError("training images do not match the model input size");

  RunLog log;
  log.config = config;
  OptimizerState opt = make_optimizer(config);
  const bool dynamic = config.flags.iterative_training && config.flags.dynamic_incrementation;
  CurriculumState cur;
  cur.k = config.initial_k();
  if (dynamic) cur = initial_curriculum(config.curriculum());

  for (int epoch = 0; epoch < config.epochs_max; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const int k = cur.k;
    Rng rng = Rng(config.seed).fork(std::uint64_t(epoch) + 1);
    BatchIterator it(train_set, config.batch_size, true, config.seed);
    it.start_epoch(epoch);
    double loss_sum = 0;
    std::size_t seen = 0;
    Tensor batch;
    while (it.next(batch)) {
      loss_sum += train_step(model, batch, k, config, rng, opt) * batch.n();
      seen += std::size_t(batch.n());
    }
    const double val = validation_loss(model, val_set, k, config.weights.alpha);
    if (!std::isfinite(val)) throw TrainingDiverged("validation loss is not finite");
    EpochRecord rec{epoch, k, loss_sum / double(seen), val,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    log.epochs.push_back(rec);
    spdlog::debug("epoch {} k={} train={:.6f} val={:.6f} ({:.1f}s)", epoch, k, rec.train_loss, val,
                  rec.wall_seconds);
    if (callbacks.on_epoch) callbacks.on_epoch(rec);
    if (dynamic) {
      cur = update_curriculum(cur, val, config);
      if (cur.terminated) {
        log.terminated_by_curriculum = true;
        break;
      }
    }
  }
  log.final_curriculum = cur;
  return {std::move(model), std::move(log)};
}

std::pair<ModelParameters, RunLog> pretrain_vanilla(const TrainConfig& config, const Dataset& train_set,
                                                    const Dataset& val_set, const TrainCallbacks& callbacks) {
  TrainConfig c = config;
  c.flags = ModeFlags{false, false, false, false};
  c.static_k = 1;
  const ModelParameters init = init_model(c.arch);
  return reed_train(c, init, train_set, val_set, callbacks);
}

}  // namespace reed
