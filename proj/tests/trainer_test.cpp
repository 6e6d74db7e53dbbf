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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "reed/data.hpp"
#include "reed/eval.hpp"
#include "reed/losses.hpp"
#include "reed/trainer.hpp"
#include "test_support.hpp"

namespace reed {
namespace {

// 1-channel 8x8 images, one 2x2 stride-2 convolution in the encoder (10
// parameters) and one 2x2 stride-2 transposed convolution plus sigmoid in
// the decoder (5 parameters).
BasicModel<double> toy_model(std::uint64_t seed) {
  BasicModel<double> m;
  m.arch.image_size = 8;
  m.arch.channels = 1;
  m.arch.latent_channels = 1;
  m.arch.conv_widths = {1};
  m.latent_channels = 1;
  m.encoder_net = Network("encoder", {LayerSpec::conv(1, 2, 2, 2, 0)});
  m.decoder_net = Network("decoder", {LayerSpec::conv_transpose(1, 1, 2, 2, 0), LayerSpec::sigmoid()});
  Rng rng(seed);
  m.encoder = cast_params<double>(m.encoder_net.init_params(rng));
  m.decoder = cast_params<double>(m.decoder_net.init_params(rng));
  // Keep the posterior spread moderate so sampled iterates stay informative.
  for (double& v : m.encoder[1].value) v = -1.0;
  return m;
}

BasicTensor<double> toy_batch(std::uint64_t seed) {
  Rng rng(seed);
  BasicTensor<double> x({2, 1, 8, 8});
  for (auto& v : x.values()) v = rng.uniform();
  return x;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// Central differences of final_iteration_loss against the analytic
// gradients, for every parameter of the trainable networks.
void check_gradients(BasicModel<double> model, int k, bool first_step, bool encoder_trainable) {
  ASSERT_LE(parameter_count(cast_params<float>(model.decoder)), 10u);
  model.encoder_trainable = encoder_trainable;
  TrainConfig cfg;
  cfg.flags.first_step_loss = first_step;
  cfg.weights = {0.01, 1.0};
  Rng rng(77);
  const Rollout<double> r = rollout_prefix(model, toy_batch(5), k, rng);
  BasicTensor<double> noise({2, 1, 4, 4});
  for (auto& v : noise.values()) v = rng.normal();

  const StepGradients<double> g = final_iteration_gradients(model, r, cfg, noise);
  const double h = 1e-6;
  auto probe = [&](ParamSet<double> BasicModel<double>::*set, const ParamSet<double>& grads) {
    for (std::size_t s = 0; s < (model.*set).size(); ++s)
      for (std::size_t i = 0; i < (model.*set)[s].value.size(); ++i) {
        BasicModel<double> up = model, dn = model;
        (up.*set)[s].value[i] += h;
        (dn.*set)[s].value[i] -= h;
        const double fd =
            (final_iteration_loss(up, r, cfg, noise).total - final_iteration_loss(dn, r, cfg, noise).total) / (2 * h);
        EXPECT_LT(relative_error(grads[s].value[i], fd), 1e-3)
            << (model.*set)[s].name << "[" << i << "] analytic " << grads[s].value[i] << " fd " << fd;
      }
  };
  probe(&BasicModel<double>::decoder, g.decoder);
  if (encoder_trainable) {
    ASSERT_FALSE(g.encoder.empty());
    probe(&BasicModel<double>::encoder, g.encoder);
  } else {
    EXPECT_TRUE(g.encoder.empty());
  }
}

TEST(Gradients, FirstStepLossDecoder) { check_gradients(toy_model(1), 3, true, false); }
TEST(Gradients, SourceLossDecoder) { check_gradients(toy_model(2), 3, false, false); }
TEST(Gradients, SingleStepEncoderAndDecoder) { check_gradients(toy_model(3), 1, false, true); }
TEST(Gradients, IterativeEncoderAndDecoder) { check_gradients(toy_model(4), 4, true, true); }

TEST(FinalIteration, FirstStepLossAtKOneIsKlOnly) {
  const BasicModel<double> m = toy_model(5);
  TrainConfig cfg;
  Rng rng(1);
  const auto r = rollout_prefix(m, toy_batch(6), 1, rng);
  BasicTensor<double> noise({2, 1, 4, 4}, 0.3);
  const LossTerms t = final_iteration_loss(m, r, cfg, noise);
  EXPECT_EQ(t.mse, 0.0);
  EXPECT_EQ(t.perceptual, 0.0);
  EXPECT_NEAR(t.total, cfg.weights.beta * t.kl, 1e-15);
  EXPECT_GT(t.kl, 0.0);
}

TEST(Rollout, PrefixHoldsFirstIterate) {
  const BasicModel<double> m = toy_model(6);
  Rng a(3), b(3);
  const auto r = rollout_prefix(m, toy_batch(7), 3, a);
  EXPECT_TRUE(r.x1.shape() == r.x0.shape());
  const auto r2 = rollout_prefix(m, toy_batch(7), 2, b);
  EXPECT_EQ(r2.x1.values(), r.x1.values());
  EXPECT_EQ(r2.x_prev.values(), r.x1.values());
  EXPECT_THROW(rollout_prefix(m, toy_batch(7), 0, a), ConfigError);
}

struct TinySetup {
  DatasetSplits splits;
  TrainConfig config;
  TinySetup() : splits(split(generate_synthetic(80, 16, 3), {}, 0)) {
    config.arch = testing::tiny_arch();
    config.epochs_max = 2;
    config.batch_size = 8;
    config.seed = 5;
  }
};

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.flags.iterative_training = false;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.k_max = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(TrainConfig{}.initial_k(), 4);
}

TEST(Pretrain, DeterministicForSeed) {
  TinySetup s;
  s.config = vanilla_pretrain_config();
  s.config.arch = testing::tiny_arch();
  s.config.epochs_max = 1;
  s.config.batch_size = 8;
  const auto [m1, log1] = pretrain_vanilla(s.config, s.splits.train, s.splits.val);
  const auto [m2, log2] = pretrain_vanilla(s.config, s.splits.train, s.splits.val);
  ASSERT_EQ(log1.epochs.size(), 1u);
  EXPECT_EQ(log1.epochs[0].train_loss, log2.epochs[0].train_loss);
  EXPECT_EQ(log1.epochs[0].val_loss, log2.epochs[0].val_loss);
  EXPECT_EQ(parameter_checksum(m1), parameter_checksum(m2));
}

TEST(Pretrain, BeatsConstantPredictor) {
  TinySetup s;
  TrainConfig c = vanilla_pretrain_config();
  c.arch = testing::tiny_arch();
  c.arch.latent_channels = 4;
  c.epochs_max = 6;
  c.batch_size = 8;
  const auto [model, log] = pretrain_vanilla(c, s.splits.train, s.splits.val);
  double model_mse = 0, constant_mse = 0;
  for (const auto& img : s.splits.val.items()) {
    model_mse += mse(img, encode_decode_iterate(model, img, 1, LatentMode::mean())[0]);
    constant_mse += mse(img, Image(img.height(), img.width(), img.channels(), 0.5f));
  }
  EXPECT_LT(model_mse, constant_mse);
}

TEST(Pretrain, HugeLearningRateDiverges) {
  TinySetup s;
  TrainConfig c = vanilla_pretrain_config();
  c.arch = testing::tiny_arch();
  c.learning_rate = 1e6;
  c.epochs_max = 3;
  c.batch_size = 8;
  EXPECT_THROW(pretrain_vanilla(c, s.splits.train, s.splits.val), TrainingDiverged);
}

TEST(ReedTrain, FrozenEncoderBytesInvariant) {
  TinySetup s;
  const ModelParameters init = init_model(s.config.arch);
  const auto [model, log] = reed_train(s.config, init, s.splits.train, s.splits.val);
  ASSERT_EQ(model.encoder.size(), init.encoder.size());
  for (std::size_t i = 0; i < init.encoder.size(); ++i)
    EXPECT_EQ(std::memcmp(model.encoder[i].value.data(), init.encoder[i].value.data(),
                          init.encoder[i].value.size() * sizeof(float)),
              0);
  EXPECT_FALSE(model.encoder_trainable);
  bool decoder_changed = false;
  for (std::size_t i = 0; i < init.decoder.size(); ++i) decoder_changed |= model.decoder[i].value != init.decoder[i].value;
  EXPECT_TRUE(decoder_changed);
}

TEST(ReedTrain, DynamicScheduleStartsAtKInitAndNeverDecreases) {
  TinySetup s;
  s.config.epochs_max = 10;
  s.config.plateau_patience = 1;
  s.config.plateau_tolerance = 1.0;  // only the first loss after a reset counts as progress
  s.config.k_max = 6;
  const auto [model, log] = reed_train(s.config, init_model(s.config.arch), s.splits.train, s.splits.val);
  ASSERT_FALSE(log.epochs.empty());
  EXPECT_EQ(log.epochs.front().k, 4);
  for (std::size_t i = 1; i < log.epochs.size(); ++i) EXPECT_GE(log.epochs[i].k, log.epochs[i - 1].k);
  std::vector<int> ks;
  for (const auto& e : log.epochs) ks.push_back(e.k);
  EXPECT_EQ(ks, (std::vector<int>{4, 4, 5, 5, 6, 6}));
  EXPECT_TRUE(log.terminated_by_curriculum);
  EXPECT_TRUE(log.final_curriculum.terminated);
}

TEST(ReedTrain, StaticKIsConstant) {
  TinySetup s;
  s.config = apply_variant(s.config, find_ablation_variant("IT_k2"));
  const auto [model, log] = reed_train(s.config, init_model(s.config.arch), s.splits.train, s.splits.val);
  for (const auto& e : log.epochs) EXPECT_EQ(e.k, 2);
}

TEST(ReedTrain, DeterministicLossSequence) {
  TinySetup s;
  const ModelParameters init = init_model(s.config.arch);
  const auto a = reed_train(s.config, init, s.splits.train, s.splits.val).second;
  const auto b = reed_train(s.config, init, s.splits.train, s.splits.val).second;
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].train_loss, b.epochs[i].train_loss);
    EXPECT_EQ(a.epochs[i].val_loss, b.epochs[i].val_loss);
  }
}

// All flags off with k = 1 is exactly single-step training.
TEST(ReedTrain, AllFlagsOffMatchesPretraining) {
  TinySetup s;
  TrainConfig c = vanilla_pretrain_config();
  c.arch = s.config.arch;
  c.epochs_max = 2;
  c.batch_size = 8;
  c.seed = 9;
  const auto [pm, plog] = pretrain_vanilla(c, s.splits.train, s.splits.val);
  TrainConfig r = c;
  r.flags = ModeFlags{false, false, false, false};
  r.static_k = 1;
  const auto [rm, rlog] = reed_train(r, init_model(c.arch), s.splits.train, s.splits.val);
  ASSERT_EQ(plog.epochs.size(), rlog.epochs.size());
  for (std::size_t i = 0; i < plog.epochs.size(); ++i) {
    EXPECT_EQ(plog.epochs[i].train_loss, rlog.epochs[i].train_loss);
    EXPECT_EQ(plog.epochs[i].val_loss, rlog.epochs[i].val_loss);
  }
  EXPECT_EQ(parameter_checksum(pm), parameter_checksum(rm));
}

TEST(ReedTrain, ShapeMismatchRejected) {
  TinySetup s;
  const Dataset other = generate_synthetic(10, 32, 0);
  EXPECT_THROW(reed_train(s.config, init_model(s.config.arch), other, other), ShapeError);
}

TEST(TrainStep, OnlyTrainableParametersMove) {
  TinySetup s;
  ModelParameters m = init_model(s.config.arch);
  m.encoder_trainable = false;
  const ModelParameters before = m;
  OptimizerState opt = make_optimizer(s.config);
  Rng rng(1);
  std::vector<Image> imgs(s.splits.train.items().begin(), s.splits.train.items().begin() + 4);
  const double loss = train_step(m, stack(imgs), 3, s.config, rng, opt);
  EXPECT_TRUE(std::isfinite(loss));
  for (std::size_t i = 0; i < m.encoder.size(); ++i) EXPECT_EQ(m.encoder[i].value, before.encoder[i].value);
  EXPECT_NE(m.decoder[0].value, before.decoder[0].value);
}

TEST(RunLog, WritesConfigAndEpochRecords) {
  TinySetup s;
  testing::TempDir dir("runlog");
  const auto [model, log] = reed_train(s.config, init_model(s.config.arch), s.splits.train, s.splits.val);
  write_runlog(log, dir / "runlog.jsonl");
  const std::string text = testing::read_file(dir / "runlog.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2 + long(log.epochs.size()));
  EXPECT_NE(text.find("\"type\":\"final\""), std::string::npos);
  EXPECT_NE(text.find("\"type\":\"config\""), std::string::npos);
  EXPECT_EQ(text.find("wall"), std::string::npos);
}

}  // namespace
}  // namespace reed
