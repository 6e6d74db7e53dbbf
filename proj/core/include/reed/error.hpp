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

#include <stdexcept>
#include <string>

namespace reed {

// Base of every error raised by the library. The CLI maps ConfigError and
// its relatives to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define REED_DEFINE_ERROR(Name, Base)        \
  class Name : public Base {                 \
   public:                                   \
    using Base::Base;                        \
  }

REED_DEFINE_ERROR(NotFound, Error);
REED_DEFINE_ERROR(EmptyDataset, Error);
REED_DEFINE_ERROR(SplitError, Error);
REED_DEFINE_ERROR(ShapeError, Error);
REED_DEFINE_ERROR(MetricError, Error);
REED_DEFINE_ERROR(DegenerateReference, Error);
REED_DEFINE_ERROR(TrainingDiverged, Error);
REED_DEFINE_ERROR(ReportError, Error);
REED_DEFINE_ERROR(IoError, Error);
REED_DEFINE_ERROR(ChecksumError, Error);
REED_DEFINE_ERROR(VersionError, Error);

// Usage and configuration problems.
REED_DEFINE_ERROR(ConfigError, Error);
REED_DEFINE_ERROR(SpecError, ConfigError);

#undef REED_DEFINE_ERROR

}  // namespace reed
