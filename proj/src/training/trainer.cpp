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

#include "psrn/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "psrn/numcore/adam.hpp"
#include "psrn/numcore/error.hpp"

namespace psrn::training {

const StageSpec& StagePlan::stage(int index) const {
  for (const StageSpec& s : stages) {
    if (s.index == index) return s;
  }
  throw ConfigError("stage plan has no stage " + std::to_string(index));
}

StagePlan StagePlan::full() {
  StagePlan plan;
  StageSpec s1;
  s1.index = 1;
  s1.losses = {true, true, false};
  s1.frozen = {kObjectGroup, kRelationGroup};
  s1.schedule = {ScheduleKind::kConstant, 1e-4, 1e-6, 0, 78000, 0.0};
  s1.iterations = 100000;
  StageSpec s2;
  s2.index = 2;
  s2.losses = {false, false, true};
  s2.frozen = {kPoseGroup};
  s2.schedule = {ScheduleKind::kWarmup, 1e-4, 1e-6, 2000, 28000, 0.0};
  s2.iterations = 40000;
  StageSpec s3;
  s3.index = 3;
  s3.losses = {true, true, true};
  s3.schedule = {ScheduleKind::kConstant, 5e-5, 1e-6, 0, 20000, 0.0};
  s3.iterations = 30000;
  plan.stages = {s1, s2, s3};
  return plan;
}

StagePlan StagePlan::desk() {
  StagePlan plan = full();
  StageSpec& s1 = plan.stages[0];
  s1.schedule.rate = 2e-3;
  s1.schedule.halving_step = 500;
  s1.iterations = 800;
  s1.batch_size = 32;
  StageSpec& s2 = plan.stages[1];
  s2.schedule.warmup_start = 1e-5;
  s2.schedule.rate = 1e-3;
  s2.schedule.warmup_steps = 100;
  s2.schedule.halving_step = 200;
  s2.iterations = 300;
  s2.batch_size = 32;
  StageSpec& s3 = plan.stages[2];
  s3.schedule.rate = 1e-5;
  s3.schedule.halving_step = 100;
  s3.iterations = 200;
  s3.batch_size = 64;
  return plan;
}

std::vector<TraceRow> run_stage(const StageSpec& stage,
                                std::span<const PreparedVideo> train,
                                ParameterSet& params,
                                const ModelConfig& config, std::uint64_t seed,
                                const TrainOptions& options) {
  if (train.empty()) throw DataError("training split is empty");
  if (stage.batch_size == 0) throw ConfigError("batch size must be positive");
  stage.schedule.validate();

  params.set_group_frozen("", false);
  for (const std::string& prefix : stage.frozen) {
    params.set_group_frozen(prefix, true);
  }
  params.zero_grad();
  numcore::AdamState adam(params);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::vector<TraceRow> trace;
  trace.reserve(stage.iterations);
  std::vector<Sample> batch;
  for (std::size_t step = 0; step < stage.iterations; ++step) {
    batch.clear();
    for (std::size_t b = 0; b < stage.batch_size; ++b) {
      const PreparedVideo& video = train[pick(rng)];
      batch.push_back(draw_sample(video, config.frames, rng()));
    }
    TraceRow row;
    row.step = options.step_offset + step;
    row.stage = stage.index;
    row.lr = lr_at_step(stage.schedule, step);
    row.loss = total_loss(batch, params, config, stage.losses,
                          options.weight_decay, true);
    const auto bad = numcore::first_non_finite(params);
    if (!std::isfinite(row.loss.total) || bad) {
      params.set_group_frozen("", false);
      throw NumericError("stage " + std::to_string(stage.index) + " step " +
                         std::to_string(step) + ": non-finite loss " +
                         std::to_string(row.loss.total) +
                         (bad ? "; first non-finite tensor: " + *bad
                              : std::string("; parameters still finite")));
    }
    numcore::adam_step(params, adam, row.lr, 0.0);
    if (options.on_step) options.on_step(row);
    trace.push_back(row);
  }
  params.set_group_frozen("", false);
  return trace;
}

RunSeeds RunSeeds::derive(std::uint64_t base) {
  std::seed_seq seq{static_cast<std::uint32_t>(base),
                    static_cast<std::uint32_t>(base >> 32)};
  std::mt19937_64 rng(seq);
  RunSeeds s;
  s.data = rng();
  s.init = rng();
  s.sampling = rng();
  s.eval = rng();
  return s;
}

std::uint64_t stage_seed(std::uint64_t sampling, int stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(sampling),
                    static_cast<std::uint32_t>(sampling >> 32),
                    static_cast<std::uint32_t>(stage)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<TraceRow> run_plan(const StagePlan& plan,
                               std::span<const PreparedVideo> train,
                               ParameterSet& params, const ModelConfig& config,
                               std::uint64_t sampling_seed,
                               const TrainOptions& options) {
  std::vector<TraceRow> trace;
  TrainOptions opts = options;
  for (const StageSpec& stage : plan.stages) {
    auto rows = run_stage(stage, train, params, config,
                          stage_seed(sampling_seed, stage.index), opts);
    opts.step_offset += stage.iterations;
    trace.insert(trace.end(), rows.begin(), rows.end());
  }
  return trace;
}

void write_trace_header(std::ostream& out) {
  out << "step,stage,lr,L_pos,L_vel,L_rel,reg,total\n";
}

void write_trace_rows(std::ostream& out, std::span<const TraceRow> rows) {
  out << std::setprecision(17);
  for (const TraceRow& r : rows) {
    out << r.step << ',' << r.stage << ',' << r.lr << ',' << r.loss.position
        << ',' << r.loss.velocity << ',' << r.loss.relation << ','
        << r.loss.regularization << ',' << r.loss.total << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path,
                     std::span<const TraceRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write trace '" + path.string() + "'");
  write_trace_header(out);
  write_trace_rows(out, rows);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace psrn::training
