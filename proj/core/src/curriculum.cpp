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

#include "reed/curriculum.hpp"

#include <cmath>

#include "reed/error.hpp"

namespace reed {

void CurriculumPolicy::validate() const {
  if (k_init < 1) throw ConfigError("k_init must be >= 1");
  if (k_max < k_init) throw ConfigError("k_max must be >= k_init");
  if (plateau_patience < 1) throw ConfigError("plateau_patience must be >= 1");
  if (!(tolerance >= 0) || !std::isfinite(tolerance)) throw ConfigError("plateau tolerance must be finite and >= 0");
}

CurriculumState initial_curriculum(const CurriculumPolicy& policy) {
  policy.validate();
  CurriculumState s;
  s.k = policy.k_init;
  return s;
}

CurriculumState update_curriculum(CurriculumState s, double val_loss, const CurriculumPolicy& policy) {
  if (s.terminated) return s;
  if (!std::isfinite(val_loss)) throw TrainingDiverged("validation loss is not finite");
  if (val_loss < s.best_val_loss - policy.tolerance) {
    s.best_val_loss = val_loss;
    s.plateau_counter = 0;
  } else {
    ++s.plateau_counter;
  }
  if (s.plateau_counter >= policy.plateau_patience) {
    ++s.k;
    s.plateau_counter = 0;
    s.best_val_loss = std::numeric_limits<double>::infinity();
    if (s.k > policy.k_max) s.terminated = true;
  }
  return s;
}

}  // namespace reed
