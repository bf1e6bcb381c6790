/* Copyright 2026 The PSRN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PSRN_TRAINING_SCHEDULE_HPP_
#define PSRN_TRAINING_SCHEDULE_HPP_

#include <cstddef>
#include <string>

namespace psrn::training {

enum class ScheduleKind { kConstant, kWarmup };

std::string schedule_kind_name(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& name);

// kConstant: `rate`, halved once for steps past `halving_step`.
// kWarmup: geometric ramp from `warmup_start` at step 0 to `rate` at
// `warmup_steps`, then `rate`, halved once past `halving_step`.
// The result never drops below `floor`.
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double rate = 1e-4;
  double warmup_start = 1e-6;
  std::size_t warmup_steps = 2000;
  std::size_t halving_step = 78000;
  double floor = 0.0;

  // Throws ConfigError on negative rates, or a warmup with nonpositive ends.
  void validate() const;
};

double lr_at_step(const LrSchedule& schedule, std::size_t step);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_SCHEDULE_HPP_
