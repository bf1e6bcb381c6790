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

#ifndef PSRN_TRAINING_TRAINER_HPP_
#define PSRN_TRAINING_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "psrn/training/loss.hpp"
#include "psrn/training/model.hpp"
#include "psrn/training/schedule.hpp"

namespace psrn::training {

struct StageSpec {
  int index = 1;
  LossFlags losses;
  // Parameter-name prefixes frozen for the whole stage.
  std::vector<std::string> frozen;
  LrSchedule schedule;
  std::size_t iterations = 0;
  // Videos per step; gradients are averaged over the batch.
  std::size_t batch_size = 1;
};

struct StagePlan {
  std::vector<StageSpec> stages;

  const StageSpec& stage(int index) const;

  // Stage 1: L_pos + L_vel, object and relation groups frozen, 1e-4 halved
  // after 78k. Stage 2: L_rel, pose group frozen, warmup 1e-6 -> 1e-4 over
  // 2k steps, halved after 28k. Stage 3: everything, 5e-5 constant.
  static StagePlan full();
  // Same structure, short budgets and higher rates for toy data.
  static StagePlan desk();
};

struct TraceRow {
  std::size_t step = 0;
  int stage = 0;
  double lr = 0.0;
  LossBreakdown loss;
};

struct TrainOptions {
  double weight_decay = kDefaultWeightDecay;
  // Global step number of this stage's first iteration (trace only).
  std::size_t step_offset = 0;
  // Called after every step; may be empty.
  std::function<void(const TraceRow&)> on_step;
};

// Runs one stage in place on `params`: freezes the stage's groups (so the
// fresh Adam state has no slot for them), then iterates sample -> forward ->
// loss -> backward -> Adam. Throws NumericError naming the first non-finite
// tensor when the loss or a gradient stops being finite. All parameters are
// unfrozen again on return.
std::vector<TraceRow> run_stage(const StageSpec& stage,
                                std::span<const PreparedVideo> train,
                                ParameterSet& params,
                                const ModelConfig& config, std::uint64_t seed,
                                const TrainOptions& options = {});

// Named seeds for every random stream of a run, derived from one base seed.
struct RunSeeds {
  std::uint64_t data = 0;
  std::uint64_t init = 0;
  std::uint64_t sampling = 0;
  std::uint64_t eval = 0;

  static RunSeeds derive(std::uint64_t base);
};

// Sampling seed of one stage, derived from the run's sampling seed.
std::uint64_t stage_seed(std::uint64_t sampling, int stage);

// Runs every stage of `plan` in order with consecutive global step numbers.
std::vector<TraceRow> run_plan(const StagePlan& plan,
                               std::span<const PreparedVideo> train,
                               ParameterSet& params, const ModelConfig& config,
                               std::uint64_t sampling_seed,
                               const TrainOptions& options = {});

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, std::span<const TraceRow> rows);
void write_trace_csv(const std::filesystem::path& path,
                     std::span<const TraceRow> rows);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_TRAINER_HPP_
