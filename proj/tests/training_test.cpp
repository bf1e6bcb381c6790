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

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "psrn/numcore/checkpoint.hpp"
#include "psrn/numcore/error.hpp"
#include "psrn/numcore/gradcheck.hpp"
#include "psrn/numcore/mlp.hpp"
#include "psrn/posedata/synth.hpp"
#include "psrn/training/ablation.hpp"
#include "psrn/training/evaluate.hpp"
#include "psrn/training/loss.hpp"
#include "psrn/training/schedule.hpp"
#include "psrn/training/trainer.hpp"
#include "test_util.hpp"

namespace psrn {
namespace {

using namespace training;

// ---------------------------------------------------------------- schedule

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(ScheduleTest, WarmupReachesDecadesAtExactSteps) {
  const LrSchedule s = StagePlan::full().stage(2).schedule;
  ASSERT_EQ(s.kind, ScheduleKind::kWarmup);
  EXPECT_LE(rel_diff(lr_at_step(s, 0), 1e-6), 1e-12);
  EXPECT_LE(rel_diff(lr_at_step(s, 1000), 1e-5), 1e-12);
  EXPECT_LE(rel_diff(lr_at_step(s, 2000), 1e-4), 1e-12);
}

TEST(ScheduleTest, ConstantHalvesAfterBoundary) {
  const LrSchedule s = StagePlan::full().stage(1).schedule;
  EXPECT_EQ(lr_at_step(s, 0), 1e-4);
  EXPECT_EQ(lr_at_step(s, 78000), 1e-4);
  EXPECT_EQ(lr_at_step(s, 78001), 5e-5);
}

TEST(ScheduleTest, WarmupIsContinuousAtItsEnd) {
  const LrSchedule s = StagePlan::full().stage(2).schedule;
  const double step_ratio = std::pow(100.0, 1.0 / 2000.0);
  EXPECT_NEAR(lr_at_step(s, 2000) / lr_at_step(s, 1999), step_ratio, 1e-12);
  EXPECT_EQ(lr_at_step(s, 2001), lr_at_step(s, 2000));
}

void expect_single_halving(const LrSchedule& s, std::size_t horizon) {
  int decreases = 0;
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    const double a = lr_at_step(s, t);
    const double b = lr_at_step(s, t + 1);
    if (b < a) {
      ++decreases;
      EXPECT_EQ(t, s.halving_step);
      EXPECT_EQ(b, 0.5 * a);
    }
  }
  EXPECT_EQ(decreases, 1);
}

TEST(ScheduleTest, HalvesExactlyOnceForBothKinds) {
  for (int stage = 1; stage <= 3; ++stage) {
    const LrSchedule s = StagePlan::full().stage(stage).schedule;
    expect_single_halving(s, s.halving_step + 5000);
  }
  const StagePlan desk = StagePlan::desk();
  for (const StageSpec& st : desk.stages) {
    expect_single_halving(st.schedule, st.iterations + 1000);
  }
}

TEST(ScheduleTest, FloorAndValidation) {
  LrSchedule s;
  s.rate = 1e-4;
  s.halving_step = 10;
  s.floor = 8e-5;
  EXPECT_EQ(lr_at_step(s, 11), 8e-5);
  LrSchedule bad;
  bad.rate = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  LrSchedule warm;
  warm.kind = ScheduleKind::kWarmup;
  warm.warmup_start = 0.0;
  EXPECT_THROW(warm.validate(), ConfigError);
  EXPECT_EQ(parse_schedule_kind(schedule_kind_name(ScheduleKind::kWarmup)),
            ScheduleKind::kWarmup);
  EXPECT_THROW(parse_schedule_kind("cosine"), ConfigError);
}

// ------------------------------------------------------------- fixtures

ModelConfig tiny_config(std::size_t classes) {
  ModelConfig c;
  c.num_classes = classes;
  c.frames = 4;
  c.pose.part_hidden = 3;
  c.pose.hidden = 4;
  c.pose.attention = 3;
  c.pose.lookback = 2;
  c.relation.width = 5;
  c.relation.g_layers = 2;
  c.relation.f_layers = 1;
  c.object_height = 2;
  c.object_width = 2;
  c.object_depth = 3;
  return c;
}

posedata::Dataset tiny_dataset(std::size_t classes, std::size_t persons,
                               std::size_t per_class, std::uint64_t seed) {
  posedata::SynthConfig sc;
  sc.num_classes = static_cast<int>(classes);
  sc.persons = persons;
  sc.min_frames = 6;
  sc.max_frames = 8;
  sc.train_per_class = per_class;
  sc.test_per_class = per_class;
  sc.map_height = 2;
  sc.map_width = 2;
  sc.map_depth = 3;
  sc.seed = seed;
  return posedata::to_dataset(posedata::synth_generate(sc));
}

struct World {
  ModelConfig config;
  std::vector<PreparedVideo> train;
  std::vector<PreparedVideo> test;
  ParameterSet params;
};

World make_world(std::size_t classes, std::size_t persons,
                 std::size_t per_class, std::uint64_t seed) {
  World w;
  w.config = tiny_config(classes);
  const posedata::Dataset ds =
      tiny_dataset(classes, persons, per_class, seed);
  w.config.persons = resolve_persons(w.config, ds);
  w.train = prepare_split(ds, posedata::Split::kTrain, w.config.persons);
  w.test = prepare_split(ds, posedata::Split::kTest, w.config.persons);
  std::mt19937_64 rng(seed + 100);
  init_model(w.params, w.config, rng);
  return w;
}

std::vector<Sample> batch_of(const std::vector<PreparedVideo>& videos,
                             std::size_t count, std::size_t frames) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(draw_sample(videos[i % videos.size()], frames, 40 + i));
  }
  return out;
}

std::vector<double> snapshot(const ParameterSet& params,
                             const std::string& prefix) {
  std::vector<double> out;
  for (const auto& [name, p] : params.entries()) {
    if (!numcore::starts_with(name, prefix)) continue;
    out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
  }
  return out;
}

void zero_all(ParameterSet& params) {
  for (auto& [name, p] : params.entries()) {
    for (double& v : p.tensor.values()) v = 0.0;
  }
}

// ------------------------------------------------------------------- loss

TEST(LossTest, ZeroParametersGiveThreeLogC) {
  World w = make_world(15, 2, 1, 1);
  zero_all(w.params);
  const auto batch = batch_of(w.train, 3, w.config.frames);
  const LossBreakdown l =
      total_loss(batch, w.params, w.config, {}, kDefaultWeightDecay, false);
  const double ln15 = std::log(15.0);
  EXPECT_NEAR(l.position, ln15, 1e-12);
  EXPECT_NEAR(l.velocity, ln15, 1e-12);
  EXPECT_NEAR(l.relation, ln15, 1e-12);
  EXPECT_EQ(l.regularization, 0.0);
  EXPECT_NEAR(l.total, 3.0 * ln15, 1e-12);
}

TEST(LossTest, ConfidentCorrectHeadsLeaveOnlyRegularization) {
  // All videos share one label; each head's bias puts 60 nats on it.
  World w = make_world(3, 2, 2, 2);
  std::vector<PreparedVideo> same;
  for (const PreparedVideo& v : w.train) {
    if (v.label == 1) same.push_back(v);
  }
  ASSERT_FALSE(same.empty());
  for (const std::string& head :
       {kPositionHead, kVelocityHead, std::string("relation/cls")}) {
    for (double& v : w.params.at(numcore::layer_weight_name(head, 0)).values()) {
      v = 0.0;
    }
    auto& b = w.params.at(numcore::layer_bias_name(head, 0));
    for (double& v : b.values()) v = 0.0;
    b.values()[1] = 60.0;
  }
  const auto batch = batch_of(same, 4, w.config.frames);
  const LossBreakdown l =
      total_loss(batch, w.params, w.config, {}, kDefaultWeightDecay, false);
  EXPECT_GT(l.regularization, 0.0);
  EXPECT_LT(l.position + l.velocity + l.relation, 1e-24);
  EXPECT_NEAR(l.total, l.regularization, 1e-20);
}

TEST(LossTest, TotalIsExactSumAndInactiveTermsAreZero) {
  World w = make_world(3, 2, 2, 3);
  const auto batch = batch_of(w.train, 3, w.config.frames);
  const LossBreakdown all =
      total_loss(batch, w.params, w.config, {}, 1e-3, false);
  EXPECT_EQ(all.total, all.position + all.velocity + all.relation +
                           all.regularization);
  const LossBreakdown pose =
      total_loss(batch, w.params, w.config, {true, true, false}, 1e-3, false);
  EXPECT_EQ(pose.relation, 0.0);
  EXPECT_EQ(pose.position, all.position);
  EXPECT_EQ(pose.velocity, all.velocity);
  const LossBreakdown rel =
      total_loss(batch, w.params, w.config, {false, false, true}, 1e-3, false);
  EXPECT_EQ(rel.position, 0.0);
  EXPECT_EQ(rel.velocity, 0.0);
  EXPECT_EQ(rel.relation, all.relation);
}

TEST(LossTest, RegularizationIsSquaredNormOverTrainableParameters) {
  World w = make_world(3, 2, 1, 4);
  double pose_sq = 0.0, other_sq = 0.0;
  for (const auto& [name, p] : w.params.entries()) {
    double s = 0.0;
    for (double v : p.tensor.values()) s += v * v;
    (numcore::starts_with(name, "pose/") ? pose_sq : other_sq) += s;
  }
  const auto batch = batch_of(w.train, 1, w.config.frames);
  const double lambda = 0.25;
  EXPECT_NEAR(total_loss(batch, w.params, w.config, {}, lambda, false)
                  .regularization,
              lambda * (pose_sq + other_sq), 1e-12);
  w.params.set_group_frozen(kPoseGroup, true);
  EXPECT_NEAR(total_loss(batch, w.params, w.config, {}, lambda, false)
                  .regularization,
              lambda * other_sq, 1e-12);
}

TEST(LossTest, FullNetworkGradientMatchesFiniteDifferences) {
  World w = make_world(3, 2, 1, 5);
  // Lift biases so that few ReLUs sit near their kink.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 0.2);
  for (auto& [name, p] : w.params.entries()) {
    if (name.ends_with("/b") && !name.ends_with("lstm/fw/b") &&
        !name.ends_with("lstm/bw/b")) {
      for (double& v : p.tensor.values()) v = u(rng);
    }
  }
  const auto batch = batch_of(w.train, 2, 3);
  auto closure = [&](ParameterSet& p, numcore::GradMode mode) {
    return total_loss(batch, p, w.config, {}, 1e-2,
                      mode == numcore::GradMode::kAccumulate)
        .total;
  };
  numcore::GradCheckOptions opts;
  opts.max_coords_per_tensor = 30;
  const auto report = numcore::grad_check(closure, w.params, opts);
  EXPECT_EQ(report.tensors.size(), w.params.size());
  for (const auto& t : report.tensors) {
    EXPECT_LT(t.max_rel_error, 1e-4) << t.name;
  }
}

TEST(LossTest, MissingFeatureMapIsDataError) {
  World w = make_world(3, 2, 1, 7);
  PreparedVideo video = w.train.front();
  video.objects.reset();
  const std::vector<Sample> batch = {draw_sample(video, w.config.frames, 1)};
  EXPECT_THROW(total_loss(batch, w.params, w.config, {}, 0.0, false),
               DataError);
  // Pose-only losses never touch the object stream.
  EXPECT_NO_THROW(total_loss(batch, w.params, w.config, {true, true, false},
                             0.0, false));
}

// ----------------------------------------------------------------- trainer

StageSpec short_stage(int index, std::size_t iterations) {
  StageSpec s = StagePlan::desk().stage(index);
  s.iterations = iterations;
  s.batch_size = 2;
  return s;
}

TEST(TrainerTest, StageTwoLeavesPoseParametersBitIdentical) {
  World w = make_world(3, 2, 2, 8);
  ParameterSet before = w.params;
  run_stage(short_stage(2, 15), w.train, w.params, w.config, 9);
  ParameterSet pose_before, pose_after;
  for (const auto& name : w.params.names()) {
    if (!numcore::starts_with(name, kPoseGroup)) continue;
    pose_before.add(name, before.at(name));
    pose_after.add(name, w.params.at(name));
  }
  ASSERT_GT(pose_before.size(), 0u);
  EXPECT_EQ(numcore::encode_checkpoint(pose_before),
            numcore::encode_checkpoint(pose_after));
  EXPECT_NE(snapshot(before, kRelationGroup),
            snapshot(w.params, kRelationGroup));
  // Nothing stays frozen after the stage.
  for (const auto& name : w.params.names()) {
    EXPECT_FALSE(w.params.is_frozen(name)) << name;
  }
}

TEST(TrainerTest, StageOneLeavesRelationParametersBitIdentical) {
  World w = make_world(3, 2, 2, 10);
  const auto rel = snapshot(w.params, kRelationGroup);
  const auto pose = snapshot(w.params, kPoseGroup);
  run_stage(short_stage(1, 10), w.train, w.params, w.config, 11);
  EXPECT_TRUE(testing::bit_identical(rel, snapshot(w.params, kRelationGroup)));
  EXPECT_NE(pose, snapshot(w.params, kPoseGroup));
}

TEST(TrainerTest, SameSeedsGiveBitIdenticalParametersAndTrace) {
  World a = make_world(3, 2, 2, 12);
  World b = make_world(3, 2, 2, 12);
  StagePlan plan = StagePlan::desk();
  for (StageSpec& s : plan.stages) {
    s.iterations = 6;
    s.batch_size = 2;
  }
  const auto ta = run_plan(plan, a.train, a.params, a.config, 13);
  const auto tb = run_plan(plan, b.train, b.params, b.config, 13);
  EXPECT_EQ(numcore::encode_checkpoint(a.params),
            numcore::encode_checkpoint(b.params));
  std::ostringstream ca, cb;
  write_trace_rows(ca, ta);
  write_trace_rows(cb, tb);
  EXPECT_EQ(ca.str(), cb.str());
  ASSERT_EQ(ta.size(), 18u);
  EXPECT_EQ(ta.back().step, 17u);
  EXPECT_EQ(ta.back().stage, 3);
}

TEST(TrainerTest, ZeroRatesLeaveParametersIdentical) {
  World w = make_world(3, 2, 2, 14);
  const std::string before = numcore::encode_checkpoint(w.params);
  for (int stage = 1; stage <= 3; ++stage) {
    StageSpec s = short_stage(stage, 4);
    s.schedule.kind = ScheduleKind::kConstant;
    s.schedule.rate = 0.0;
    run_stage(s, w.train, w.params, w.config, 15);
  }
  EXPECT_EQ(numcore::encode_checkpoint(w.params), before);
}

TEST(TrainerTest, NonFiniteLossNamesATensor) {
  World w = make_world(3, 2, 2, 16);
  w.params.at(numcore::layer_bias_name(kPositionHead, 0)).values()[0] = NAN;
  try {
    run_stage(short_stage(1, 3), w.train, w.params, w.config, 17);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("stage 1 step 0"), std::string::npos) << what;
    EXPECT_NE(what.find("first non-finite tensor: pose/"), std::string::npos)
        << what;
  }
  for (const auto& name : w.params.names()) EXPECT_FALSE(w.params.is_frozen(name));
}

TEST(TrainerTest, StageOneLossDropsBelowTwoLogC) {
  World w = make_world(4, 2, 10, 18);
  StageSpec s = StagePlan::desk().stage(1);
  s.iterations = 500;
  s.batch_size = 4;
  const auto trace = run_stage(s, w.train, w.params, w.config, 19);
  double tail = 0.0;
  for (std::size_t i = trace.size() - 100; i < trace.size(); ++i) {
    tail += (trace[i].loss.position + trace[i].loss.velocity) / 100.0;
  }
  EXPECT_LT(tail, 2.0 * std::log(4.0));
}

TEST(TrainerTest, TraceCsvLayout) {
  TraceRow row;
  row.step = 7;
  row.stage = 2;
  row.lr = 0.5;
  row.loss.relation = 0.25;
  row.loss.total = 0.25;
  std::ostringstream out;
  write_trace_header(out);
  write_trace_rows(out, std::vector<TraceRow>{row});
  EXPECT_EQ(out.str(),
            "step,stage,lr,L_pos,L_vel,L_rel,reg,total\n"
            "7,2,0.5,0,0,0.25,0,0.25\n");
}

TEST(TrainerTest, SeedsAreDistinctAndStable) {
  const RunSeeds a = RunSeeds::derive(1);
  const RunSeeds b = RunSeeds::derive(1);
  EXPECT_EQ(a.init, b.init);
  EXPECT_NE(a.init, a.sampling);
  EXPECT_NE(a.data, RunSeeds::derive(2).data);
  EXPECT_NE(stage_seed(a.sampling, 1), stage_seed(a.sampling, 2));
}

// --------------------------------------------------------------- evaluate

// Relation weights that copy the first C object channels through g and f,
// so the logits are a positive multiple of the object one-hot.
void plant_object_reader(World& w) {
  zero_all(w.params);
  const std::size_t pose_in = 2 * w.config.pose_output_dim();
  const std::size_t c = w.config.num_classes;
  auto eye = [&](const std::string& prefix, std::size_t layer,
                 std::size_t offset) {
    auto& m = w.params.at(numcore::layer_weight_name(prefix, layer));
    for (std::size_t r = 0; r < c; ++r) m.at(r, offset + r) = 1.0;
  };
  eye("relation/g", 0, pose_in);
  for (std::size_t l = 1; l < w.config.relation.g_layers; ++l) {
    eye("relation/g", l, 0);
  }
  for (std::size_t l = 0; l < w.config.relation.f_layers; ++l) {
    eye("relation/f", l, 0);
  }
  eye("relation/cls", 0, 0);
  for (PreparedVideo& v : w.test) {
    numcore::TensorBuffer& obj = *v.objects;
    for (double& x : obj.values()) x = 0.0;
    for (std::size_t i = 0; i < obj.dim(0); ++i) {
      obj.at(i, static_cast<std::size_t>(*v.label)) = 1.0;
    }
  }
}

TEST(EvaluateTest, PerfectClassifierGivesDiagonalConfusion) {
  World w = make_world(3, 2, 3, 20);
  plant_object_reader(w);
  const EvalReport r = evaluate(w.test, w.params, w.config, "test", {21});
  EXPECT_EQ(r.videos, 9u);
  EXPECT_EQ(r.accuracy.relation, 1.0);
  EXPECT_TRUE(r.misclassified.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(r.confusion[i][j], i == j ? 3u : 0u);
    }
  }
}

TEST(EvaluateTest, AccuracyEqualsTraceOverTotal) {
  World w = make_world(4, 2, 4, 22);
  const EvalReport r = evaluate(w.test, w.params, w.config, "test", {23});
  std::size_t trace = 0, total = 0;
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    for (std::size_t j = 0; j < r.confusion[i].size(); ++j) {
      total += r.confusion[i][j];
      if (i == j) trace += r.confusion[i][j];
    }
  }
  EXPECT_EQ(total, r.videos);
  EXPECT_DOUBLE_EQ(r.accuracy.relation,
                   static_cast<double>(trace) / static_cast<double>(total));
  EXPECT_EQ(confusion_accuracy(r.confusion), r.accuracy.relation);
  EXPECT_EQ(r.misclassified.size(), total - trace);
  EXPECT_EQ(r.attention_videos, r.videos);
}

TEST(EvaluateTest, ReportsAreDeterministic) {
  World w = make_world(3, 2, 3, 24);
  const auto a = report_to_json(evaluate(w.test, w.params, w.config, "test", {25}));
  const auto b = report_to_json(evaluate(w.test, w.params, w.config, "test", {25}));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_TRUE(a["accuracy"].contains("two_stream"));
}

TEST(EvaluateTest, PoseOnlyReportHasNullTwoStream) {
  World w = make_world(3, 2, 2, 26);
  EvalOptions opts;
  opts.with_relation = false;
  const EvalReport r = evaluate(w.test, w.params, w.config, "test", opts);
  EXPECT_FALSE(r.relation_evaluated);
  EXPECT_EQ(r.accuracy.relation, r.accuracy.pose_fusion);
  EXPECT_TRUE(report_to_json(r)["accuracy"]["two_stream"].is_null());
}

TEST(EvaluateTest, EmptySplitIsDataError) {
  World w = make_world(3, 2, 1, 27);
  EXPECT_THROW(evaluate(std::vector<PreparedVideo>{}, w.params, w.config,
                        "test"),
               DataError);
}

TEST(EvaluateTest, ConfusionAccuracyOracle) {
  EXPECT_DOUBLE_EQ(confusion_accuracy({{3, 1}, {2, 4}}), 0.7);
  EXPECT_THROW(confusion_accuracy({{0, 0}, {0, 0}}), DataError);
}

// ---------------------------------------------------------------- ablation

TEST(AblationTest, FourRowsInGridOrder) {
  World w = make_world(3, 2, 2, 28);
  const posedata::Dataset ds = tiny_dataset(3, 2, 2, 28);
  StagePlan plan = StagePlan::desk();
  for (StageSpec& s : plan.stages) {
    s.iterations = 2;
    s.batch_size = 1;
  }
  AblationGrid grid;
  grid.seeds = {1, 2};
  const auto rows = ablation_harness(ds, w.config, plan, grid);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].setting.label(), "uni-LSTM");
  EXPECT_EQ(rows[1].setting.label(), "uni-LSTM+attention");
  EXPECT_EQ(rows[2].setting.label(), "bi-LSTM");
  EXPECT_EQ(rows[3].setting.label(), "bi-LSTM+attention");
  for (const AblationRow& row : rows) {
    ASSERT_EQ(row.per_seed.size(), 2u);
    EXPECT_DOUBLE_EQ(row.mean.relation,
                     0.5 * (row.per_seed[0].relation + row.per_seed[1].relation));
  }
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  std::size_t lines = 0;
  for (char ch : csv.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 4u * 3u);
  EXPECT_EQ(ablation_to_json(rows).size(), 4u);
}

TEST(AblationTest, AttentionOffEqualsOnForSinglePerson) {
  World w = make_world(3, 1, 2, 29);
  ASSERT_EQ(w.config.persons, 1u);
  ModelConfig off = w.config;
  off.pose.use_attention = false;
  for (const PreparedVideo& v : w.test) {
    const Sample s = draw_sample(v, w.config.frames, 30);
    Tape ta, tb;
    const ModelForward a = model_forward(ta, w.params, w.config, s, true);
    const ModelForward b = model_forward(tb, w.params, off, s, true);
    EXPECT_TRUE(testing::bit_identical(
        testing::to_vector(ta.value(a.relation->logits)),
        testing::to_vector(tb.value(b.relation->logits))));
    EXPECT_TRUE(testing::bit_identical(
        testing::to_vector(ta.value(a.position_logits)),
        testing::to_vector(tb.value(b.position_logits))));
  }
}

}  // namespace
}  // namespace psrn
