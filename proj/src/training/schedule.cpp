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

#include "psrn/training/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "psrn/numcore/error.hpp"

namespace psrn::training {

std::string schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::kWarmup ? "warmup" : "constant";
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "warmup") return ScheduleKind::kWarmup;
  if (name == "constant") return ScheduleKind::kConstant;
  throw ConfigError("unknown schedule '" + name +
                    "' (expected constant or warmup)");
}

void LrSchedule::validate() const {
  if (rate < 0.0 || floor < 0.0) {
    throw ConfigError("learning rates must be non-negative");
  }
  if (kind == ScheduleKind::kWarmup &&
      (rate <= 0.0 || warmup_start <= 0.0 || warmup_steps == 0)) {
    throw ConfigError("warmup needs positive start/target rates and steps");
  }
}

double lr_at_step(const LrSchedule& schedule, std::size_t step) {
  double lr = schedule.rate;
  if (schedule.kind == ScheduleKind::kWarmup && step < schedule.warmup_steps) {
    const double frac = static_cast<double>(step) /
                        static_cast<double>(schedule.warmup_steps);
    lr = schedule.warmup_start *
         std::pow(schedule.rate / schedule.warmup_start, frac);
  }
  if (step > schedule.halving_step) lr *= 0.5;
  return std::max(lr, schedule.floor);
}

}  // namespace psrn::training
