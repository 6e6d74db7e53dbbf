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
#include <random>

namespace reed {

// Seeded random stream. All randomness in the library goes through this so
// that runs are reproducible for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)), seed_mix_(mix(seed)) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

  // Independent child stream; the parent is not advanced.
  Rng fork(std::uint64_t stream) const { return Rng(seed_mix_ ^ mix(stream + 0x9E3779B97F4A7C15ULL), 0); }

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(std::uint64_t mixed, int) : engine_(mixed), seed_mix_(mixed) {}

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_mix_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace reed
