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

#include <limits>

namespace reed {

// Plateau-driven schedule for the number of encode-decode iterations k.
struct CurriculumPolicy {
  int k_init = 4;
  int k_max = 20;
  int plateau_patience = 5;
  double tolerance = 1e-5;  // absolute improvement required on the validation loss

  void validate() const;
};

struct CurriculumState {
  int k = 4;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int plateau_counter = 0;
  bool terminated = false;

  bool operator==(const CurriculumState&) const = default;
};

CurriculumState initial_curriculum(const CurriculumPolicy& policy);

// One end-of-epoch update. A validation loss below best - tolerance resets
// the plateau counter; otherwise the counter grows, and on reaching the
// patience k is incremented, the counter cleared and the best loss reset
// (the task just got harder). Passing k_max terminates the schedule.
CurriculumState update_curriculum(CurriculumState state, double val_loss, const CurriculumPolicy& policy);

}  // namespace reed
