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

// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psrn/cli/commands.hpp"
#include "psrn/cli/gradcheck_suite.hpp"
#include "psrn/numcore/checkpoint.hpp"
#include "psrn/numcore/ops.hpp"
#include "psrn/posedata/preprocess.hpp"
#include "psrn/posedata/synth.hpp"
#include "psrn/posestream/stream.hpp"
#include "psrn/relnet/relation.hpp"
#include "psrn/training/ablation.hpp"

namespace psrn {
namespace {

namespace fs = std::filesystem;
using numcore::ParameterSet;
using numcore::Tape;
using numcore::TensorBuffer;
using numcore::Var;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

TensorBuffer random_tensor(numcore::Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorBuffer t(std::move(shape));
  for (double& v : t.values()) v = u(rng);
  return t;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("psrn_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = s.str();
  }
  return out;
}

std::string subset_bytes(const ParameterSet& params, const std::string& prefix) {
  ParameterSet sub;
  for (const auto& [name, p] : params.entries()) {
    if (numcore::starts_with(name, prefix)) sub.add(name, p.tensor);
  }
  return numcore::encode_checkpoint(sub);
}

// ------------------------------------------------------------------ 1

Outcome gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  const cli::GradSuiteReport r = cli::run_gradcheck_suite(1);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = r.passed() && r.modules.size() == 10 && secs < 120.0;
  o.detail = std::to_string(r.modules.size()) + " modules, max rel error " +
             fmt("%.2e", r.max_rel_error()) + ", " + fmt("%.1f", secs) + " s";
  return o;
}

// ------------------------------------------------------------------ 2

Outcome permutation_invariance() {
  relnet::RelationConfig cfg;
  cfg.width = 16;
  const std::size_t half = 6, depth = 8, objects = 16, classes = 4;
  ParameterSet params;
  std::mt19937_64 rng(2);
  relnet::init_relation(params, cfg, 2 * half, depth, classes, rng);
  double worst = 0.0;
  int argmax_changes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const TensorBuffer hl = random_tensor({half}, rng);
    const TensorBuffer hv = random_tensor({half}, rng);
    const TensorBuffer x = random_tensor({objects, depth}, rng);
    std::vector<std::size_t> perm(objects);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    TensorBuffer shuffled({objects, depth});
    for (std::size_t i = 0; i < objects; ++i) {
      for (std::size_t c = 0; c < depth; ++c) shuffled.at(i, c) = x.at(perm[i], c);
    }
    Tape tape;
    auto logits = [&](const TensorBuffer& obj) {
      const auto out = relnet::relation_forward(
          tape, params, cfg, tape.constant(hl), tape.constant(hv),
          tape.constant(obj), classes);
      const auto v = tape.value(out.logits).values();
      return std::vector<double>(v.begin(), v.end());
    };
    const auto a = logits(x);
    const auto b = logits(shuffled);
    for (std::size_t k = 0; k < classes; ++k) {
      worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    argmax_changes += numcore::argmax(a) != numcore::argmax(b);
  }
  return {worst < 1e-9 && argmax_changes == 0,
          "100 instances, max |delta logit| " + fmt("%.2e", worst) +
              ", argmax changes " + std::to_string(argmax_changes)};
}

// ------------------------------------------------------------------ 3

Outcome attention_limits() {
  posestream::PoseStreamConfig cfg;
  cfg.part_hidden = 4;
  cfg.hidden = 6;
  cfg.attention = 5;
  ParameterSet params;
  std::mt19937_64 rng(3);
  posestream::init_pose_stream(params, cfg, rng);
  double worst_sum = 0.0;
  bool one_hot_exact = true, single_is_one = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
    Tape tape;
    const Var poses = tape.constant(random_tensor({n, cfg.pose_dim()}, rng));
    const Var h = tape.constant(random_tensor({cfg.hidden}, rng));
    const Var alpha = posestream::attention_weights(tape, params, poses, h);
    const auto a = tape.value(alpha).values();
    worst_sum = std::max(worst_sum,
                         std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0));
    if (n == 1 && a[0] != 1.0) single_is_one = false;
    const std::size_t pick = static_cast<std::size_t>(trial) % n;
    TensorBuffer hot({n});
    hot.values()[pick] = 1.0;
    const auto selected =
        tape.value(posestream::select_pose(poses, tape.constant(hot))).values();
    const auto row = tape.value(numcore::row(poses, pick)).values();
    if (!std::equal(selected.begin(), selected.end(), row.begin(), row.end())) {
      one_hot_exact = false;
    }
  }
  return {worst_sum < 1e-9 && one_hot_exact && single_is_one,
          "max |sum alpha - 1| " + fmt("%.2e", worst_sum) + ", one-hot exact " +
              (one_hot_exact ? "yes" : "no") + ", N=1 gives [1] " +
              (single_is_one ? "yes" : "no")};
}

// ------------------------------------------------------------------ 4

posedata::Pose random_pose(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> ux(-20.0, w + 20.0), uy(-20.0, h + 20.0);
  std::bernoulli_distribution missing(0.2);
  posedata::Pose pose;
  for (auto& k : pose) {
    if (missing(rng)) continue;
    k = {ux(rng), uy(rng), true};
  }
  return pose;
}

Outcome pose_filling(const posedata::Dataset& toy, std::size_t persons) {
  std::size_t frames = 0, bad = 0;
  for (auto split : {posedata::Split::kTrain, posedata::Split::kTest}) {
    for (const auto& v : training::prepare_split(toy, split, persons)) {
      for (const posedata::Frame& f : v.frames) {
        ++frames;
        bool ok = f.size() == persons;
        for (const posedata::Pose& p : f) {
          for (const posedata::Keypoint& k : p) {
            ok = ok && k.x >= 0.0 && k.x <= 1.0 && k.y >= 0.0 && k.y <= 1.0;
          }
        }
        bad += !ok;
      }
    }
  }
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> count(0, 3);
  posedata::PoseSequence seq;
  seq.video_id = "random";
  seq.width = 320;
  seq.height = 240;
  for (int f = 0; f < 1000; ++f) {
    posedata::Frame frame;
    for (std::size_t i = count(rng); i > 0; --i) {
      frame.push_back(random_pose(rng, seq.width, seq.height));
    }
    seq.frames.push_back(std::move(frame));
  }
  const auto once = posedata::fill_poses(seq, 3);
  const bool idempotent = posedata::fill_poses(once, 3) == once;
  return {bad == 0 && idempotent,
          std::to_string(frames) + " toy frames, " + std::to_string(bad) +
              " violations; fill_poses idempotent over 1000 random frames: " +
              (idempotent ? "yes" : "no")};
}

// ------------------------------------------------------------------ 5

Outcome stage_freeze(const posedata::Dataset& toy) {
  training::ModelConfig cfg = training::ModelConfig::desk();
  cfg.persons = training::resolve_persons(cfg, toy);
  const auto train =
      training::prepare_split(toy, posedata::Split::kTrain, cfg.persons);
  ParameterSet params;
  std::mt19937_64 rng(5);
  training::init_model(params, cfg, rng);
  training::StagePlan plan = training::StagePlan::desk();
  training::StageSpec s1 = plan.stage(1);
  s1.iterations = 50;
  training::run_stage(s1, train, params, cfg, 51);
  const std::string pose_before = subset_bytes(params, training::kPoseGroup);
  const std::string rel_before = subset_bytes(params, training::kRelationGroup);
  training::StageSpec s2 = plan.stage(2);
  s2.iterations = 100;
  training::run_stage(s2, train, params, cfg, 52);
  const bool identical =
      subset_bytes(params, training::kPoseGroup) == pose_before;
  const bool relation_moved =
      subset_bytes(params, training::kRelationGroup) != rel_before;
  return {identical && relation_moved,
          std::string("pose-stream bytes identical after 100 stage-2 steps: ") +
              (identical ? "yes" : "no") + "; relation updated: " +
              (relation_moved ? "yes" : "no")};
}

// ------------------------------------------------------------------ 6

Outcome schedule_reproduction() {
  using training::lr_at_step;
  const training::StagePlan plan = training::StagePlan::full();
  const auto& warm = plan.stage(2).schedule;
  double worst = 0.0;
  const std::pair<std::size_t, double> points[] = {
      {0, 1e-6}, {1000, 1e-5}, {2000, 1e-4}};
  for (const auto& [step, want] : points) {
    worst = std::max(worst, std::abs(lr_at_step(warm, step) - want) / want);
  }
  bool halving_ok = true;
  for (const auto* s : {&plan.stage(1).schedule, &warm}) {
    int drops = 0;
    for (std::size_t t = 0; t < s->halving_step + 5000; ++t) {
      const double a = lr_at_step(*s, t), b = lr_at_step(*s, t + 1);
      if (b < a) {
        ++drops;
        halving_ok = halving_ok && t == s->halving_step && b == 0.5 * a;
      }
    }
    halving_ok = halving_ok && drops == 1;
  }
  return {worst <= 1e-12 && halving_ok,
          "max relative error " + fmt("%.1e", worst) +
              ", single halving at the boundary for constant and warmup: " +
              (halving_ok ? "yes" : "no")};
}

// ------------------------------------------------------------------ 7, 9

// Per stage, non-overlapping 100-step means of the total loss must never
// increase.
bool monotone_blocks(const std::vector<training::TraceRow>& trace,
                     std::string& where) {
  std::map<int, std::vector<double>> blocks;
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : trace) {
    auto& [sum, n] = acc[r.stage];
    sum += r.loss.total;
    if (++n == 100) {
      blocks[r.stage].push_back(sum / 100.0);
      sum = 0.0;
      n = 0;
    }
  }
  for (const auto& [stage, means] : blocks) {
    for (std::size_t i = 1; i < means.size(); ++i) {
      if (means[i] > means[i - 1]) {
        where = "stage " + std::to_string(stage) + " block " +
                std::to_string(i) + ": " + fmt("%.5f", means[i - 1]) + " -> " +
                fmt("%.5f", means[i]);
        return false;
      }
    }
  }
  return true;
}

struct ToyRun {
  Outcome learning;
  Outcome attention;
};

ToyRun toy_learning() {
  std::ostringstream log;
  cli::RunConfig cfg = cli::RunConfig::preset_config("desk");
  cfg.out = scratch_dir("toy").string();
  const auto t0 = std::chrono::steady_clock::now();
  cli::cmd_synth(cfg, log);
  const auto trace = cli::cmd_train(cfg, "all", std::nullopt, log);
  const training::EvalReport report =
      cli::cmd_eval(cfg, "test", std::nullopt, false, log);
  const double secs = seconds_since(t0);

  std::size_t iterations = 0;
  for (const auto& s : cfg.plan.stages) iterations += s.iterations;
  std::string where;
  const bool monotone = monotone_blocks(trace, where);
  const double acc = report.final_accuracy();
  ToyRun out;
  out.learning.pass =
      acc >= 0.95 && iterations <= 3000 && secs < 600.0 && monotone;
  out.learning.detail =
      "test accuracy " + fmt("%.4f", acc) + ", " + std::to_string(iterations) +
      " iterations, " + fmt("%.1f", secs) + " s, 100-step means " +
      (monotone ? "non-increasing in every stage" : "rise at " + where);
  const double rate = report.attention_hit_rate().value_or(0.0);
  out.attention.pass = rate >= 0.9;
  out.attention.detail = "signal person has the highest mean attention in " +
                         std::to_string(report.attention_hits) + "/" +
                         std::to_string(report.attention_videos) +
                         " test videos (" + fmt("%.4f", rate) + ")";
  return out;
}

// ------------------------------------------------------------------ 8

Outcome ablation_ordering() {
  posedata::SynthConfig sc;
  sc.ambiguous_pairs = 1;
  sc.split_cues = true;
  sc.seed = training::RunSeeds::derive(1).data;
  const posedata::Dataset ds =
      posedata::to_dataset(posedata::synth_generate(sc));
  training::StagePlan plan = training::StagePlan::desk();
  const std::size_t iterations[] = {400, 200, 100};
  for (std::size_t i = 0; i < 3; ++i) {
    plan.stages[i].iterations = iterations[i];
    plan.stages[i].batch_size = 16;
  }
  plan.stages[0].schedule.halving_step = 300;
  plan.stages[1].schedule.halving_step = 150;
  plan.stages[2].schedule.halving_step = 50;
  training::AblationGrid grid;
  grid.seeds = {1, 2, 3};
  const auto rows = training::ablation_harness(
      ds, training::ModelConfig::desk(), plan, grid);
  auto find = [&](posestream::StreamMode mode, bool attention) {
    for (const auto& r : rows) {
      if (r.setting.mode == mode && r.setting.attention == attention) {
        return r.mean;
      }
    }
    return training::BranchAccuracy{};
  };
  using posestream::StreamMode;
  const auto bi_att = find(StreamMode::kBidirectional, true);
  const auto uni_att = find(StreamMode::kUnidirectional, true);
  const double no_att = std::max(find(StreamMode::kUnidirectional, false).relation,
                                 find(StreamMode::kBidirectional, false).relation);
  const double margin = 0.02;
  const bool branch =
      bi_att.relation >= bi_att.pose_fusion + margin &&
      bi_att.pose_fusion >= std::max(bi_att.position, bi_att.velocity) + margin;
  const bool settings = bi_att.relation >= uni_att.relation + margin &&
                        uni_att.relation >= no_att + margin;
  return {branch && settings,
          "bi+att branches: two-stream " + fmt("%.4f", bi_att.relation) +
              ", fusion " + fmt("%.4f", bi_att.pose_fusion) + ", position " +
              fmt("%.4f", bi_att.position) + ", velocity " +
              fmt("%.4f", bi_att.velocity) + " [" + (branch ? "ok" : "violated") +
              "]; two-stream by setting: bi+att " + fmt("%.4f", bi_att.relation) +
              ", uni+att " + fmt("%.4f", uni_att.relation) + ", no-att " +
              fmt("%.4f", no_att) + " [" + (settings ? "ok" : "violated") + "]"};
}

// ------------------------------------------------------------------ 10

Outcome determinism() {
  auto run = [](const fs::path& dir) {
    std::ostringstream log;
    cli::RunConfig cfg = cli::RunConfig::preset_config("desk");
    cfg.out = dir.string();
    cfg.synth.train_per_class = 10;
    cfg.synth.test_per_class = 5;
    for (auto& s : cfg.plan.stages) {
      s.iterations = 40;
      s.batch_size = 4;
    }
    cli::cmd_synth(cfg, log);
    cli::cmd_train(cfg, "all", std::nullopt, log);
    cli::cmd_eval(cfg, "test", std::nullopt, false, log);
    cli::cmd_inspect(cfg, "test", std::nullopt, std::nullopt, log);
    return tree(dir);
  };
  const fs::path dir = scratch_dir("determinism");
  const auto first = run(dir);
  fs::remove_all(dir);
  const auto second = run(dir);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    differing += it == second.end() || it->second != bytes;
  }
  const bool has_all = first.contains("checkpoint_stage3.bin") &&
                       first.contains("trace.csv") &&
                       first.contains("eval_test.json");
  return {has_all && differing == 0 && first.size() == second.size(),
          std::to_string(first.size()) +
              " output files compared byte for byte (checkpoints, traces, "
              "reports, dataset), " +
              std::to_string(differing) + " differ"};
}

}  // namespace
}  // namespace psrn

int main() {
  using namespace psrn;
  int failures = 0;
  auto report = [&](int index, const std::string& name,
                    const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << index << " " << (o.pass ? "PASS" : "FAIL")
              << " " << name << ": " << o.detail << std::endl;
  };

  posedata::SynthConfig toy_cfg;
  toy_cfg.seed = training::RunSeeds::derive(1).data;
  const posedata::Dataset toy =
      posedata::to_dataset(posedata::synth_generate(toy_cfg));
  const std::size_t persons =
      training::resolve_persons(training::ModelConfig::desk(), toy);

  report(1, "gradient integrity", gradient_integrity);
  report(2, "relational permutation invariance", permutation_invariance);
  report(3, "attention normalization and selection limits", attention_limits);
  report(4, "pose filling contract", [&] { return pose_filling(toy, persons); });
  report(5, "stage-freeze contract", [&] { return stage_freeze(toy); });
  report(6, "schedule reproduction", schedule_reproduction);
  ToyRun toy_run;
  bool toy_ok = true;
  std::string toy_error;
  try {
    toy_run = toy_learning();
  } catch (const std::exception& e) {
    toy_ok = false;
    toy_error = e.what();
  }
  report(7, "toy-scale learning", [&] {
    if (!toy_ok) throw std::runtime_error(toy_error);
    return toy_run.learning;
  });
  report(8, "ablation ordering", ablation_ordering);
  report(9, "attention targeting", [&] {
    if (!toy_ok) throw std::runtime_error(toy_error);
    return toy_run.attention;
  });
  report(10, "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria PASS"
                              : std::to_string(failures) + " criteria FAIL")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
