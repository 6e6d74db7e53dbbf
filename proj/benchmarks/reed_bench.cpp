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

#include <benchmark/benchmark.h>

#include <vector>

#include "reed/data.hpp"
#include "reed/metrics.hpp"
#include "reed/spectral.hpp"
#include "reed/trainer.hpp"
#include "reed/vae.hpp"

namespace {

std::vector<reed::Image> images(int n) {
  const reed::Dataset d = reed::generate_synthetic(n, 32, 1);
  return {d.items().begin(), d.items().end()};
}

void BM_EncodeDecode(benchmark::State& state) {
  const reed::ModelParameters model = reed::init_model(reed::ArchConfig{});
  const auto imgs = images(int(state.range(0)));
  const reed::Tensor batch = reed::stack(imgs);
  for (auto _ : state) {
    auto z = reed::latent_mean(reed::encode(model, batch));
    benchmark::DoNotOptimize(reed::decode(model, z));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeDecode)->Arg(1)->Arg(16);

void BM_TrainStep(benchmark::State& state) {
  reed::TrainConfig cfg;
  cfg.flags = {true, true, false, true};
  reed::ModelParameters model = reed::init_model(cfg.arch);
  model.encoder_trainable = false;
  const reed::Tensor batch = reed::stack(images(cfg.batch_size));
  auto opt = reed::make_optimizer(cfg);
  reed::Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(reed::train_step(model, batch, int(state.range(0)), cfg, rng, opt));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const auto imgs = images(2);
  for (auto _ : state) benchmark::DoNotOptimize(reed::ssim(imgs[0], imgs[1]));
}
BENCHMARK(BM_Ssim);

void BM_Spectrum(benchmark::State& state) {
  const auto imgs = images(1);
  for (auto _ : state) benchmark::DoNotOptimize(reed::magnitude_spectrum(imgs[0]));
}
BENCHMARK(BM_Spectrum);

}  // namespace

BENCHMARK_MAIN();
