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

#include "psrn/cli/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "psrn/numcore/gradcheck.hpp"
#include "psrn/numcore/ops.hpp"
#include "psrn/objectstream/conv_stub.hpp"
#include "psrn/posedata/synth.hpp"
#include "psrn/posestream/stream.hpp"
#include "psrn/relnet/relation.hpp"
#include "psrn/training/loss.hpp"

namespace psrn::cli {

using numcore::GradMode;
using numcore::ParameterSet;
using numcore::Tape;
using numcore::TensorBuffer;
using numcore::Var;

double GradSuiteReport::max_rel_error() const {
  double m = 0.0;
  for (const ModuleCheck& c : modules) m = std::max(m, c.max_rel_error);
  return m;
}

bool GradSuiteReport::passed() const {
  return !modules.empty() && max_rel_error() < tolerance;
}

namespace {

constexpr double kWeightDecay = 1e-3;

training::ModelConfig suite_model() {
  training::ModelConfig c;
  c.num_classes = 3;
  c.frames = 3;
  c.pose.part_hidden = 3;
  c.pose.hidden = 4;
  c.pose.attention = 3;
  c.pose.lookback = 2;
  c.relation.width = 5;
  c.relation.g_layers = 2;
  c.relation.f_layers = 2;
  c.object_height = 2;
  c.object_width = 2;
  c.object_depth = 3;
  c.conv_hidden = 2;
  return c;
}

TensorBuffer random_tensor(numcore::Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorBuffer t(std::move(shape));
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Fixed random linear functional, so every output coordinate matters.
Var project(Var x, std::uint64_t seed) {
  Tape& tape = *x.tape;
  const std::size_t n = tape.value(x).size();
  std::mt19937_64 rng(seed);
  const Var w = tape.constant(random_tensor({1, n}, rng));
  return numcore::affine(numcore::reshape(x, {n}), w, std::nullopt);
}

// Positive biases keep ReLUs away from their kink during differencing.
void lift_biases(ParameterSet& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.2);
  for (auto& [name, p] : params.entries()) {
    if (name.ends_with("/b") && name.find("lstm") == std::string::npos) {
      for (double& v : p.tensor.values()) v = u(rng);
    }
  }
}

ParameterSet subset(const ParameterSet& params, const std::string& prefix) {
  ParameterSet out;
  for (const auto& [name, p] : params.entries()) {
    if (numcore::starts_with(name, prefix)) out.add(name, p.tensor);
  }
  return out;
}

ModuleCheck check(const std::string& module, ParameterSet& params,
                  const numcore::LossClosure& closure, std::uint64_t seed) {
  numcore::GradCheckOptions opts;
  opts.seed = seed;
  const numcore::GradCheckReport r = numcore::grad_check(closure, params, opts);
  ModuleCheck out;
  out.module = module;
  out.max_rel_error = r.max_rel_error;
  double worst = -1.0;
  for (const numcore::TensorGradError& t : r.tensors) {
    out.coordinates += t.checked;
    if (t.max_rel_error > worst) {
      worst = t.max_rel_error;
      out.worst_tensor = t.name;
      out.analytic_at_max = t.analytic_at_max;
      out.numeric_at_max = t.numeric_at_max;
    }
  }
  return out;
}

double finish(Tape& tape, Var loss, GradMode mode) {
  if (mode == GradMode::kAccumulate) tape.backward(loss);
  return tape.scalar(loss);
}

struct Fixture {
  training::ModelConfig config;
  ParameterSet model;
  std::vector<training::PreparedVideo> videos;
  std::vector<training::Sample> batch;
};

Fixture make_fixture(std::uint64_t seed, bool conv_stub) {
  Fixture f;
  f.config = suite_model();
  f.config.conv_stub = conv_stub;
  posedata::SynthConfig sc;
  sc.num_classes = static_cast<int>(f.config.num_classes);
  sc.persons = 2;
  sc.min_frames = 4;
  sc.max_frames = 6;
  sc.train_per_class = 1;
  sc.test_per_class = 1;
  sc.map_height = f.config.object_height;
  sc.map_width = f.config.object_width;
  sc.map_depth = f.config.object_depth;
  sc.rasters = conv_stub;
  sc.raster_scale = 2;
  sc.seed = seed;
  const posedata::Dataset ds = posedata::to_dataset(posedata::synth_generate(sc));
  f.config.persons = training::resolve_persons(f.config, ds);
  f.videos = training::prepare_split(ds, posedata::Split::kTrain,
                                     f.config.persons);
  std::mt19937_64 rng(seed + 1);
  training::init_model(f.model, f.config, rng);
  lift_biases(f.model, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    f.batch.push_back(
        training::draw_sample(f.videos[i], f.config.frames, seed + 10 + i));
  }
  return f;
}

}  // namespace

GradSuiteReport run_gradcheck_suite(std::uint64_t seed) {
  GradSuiteReport report;
  std::mt19937_64 rng(seed);
  Fixture fx = make_fixture(seed, false);
  const auto& pose_cfg = fx.config.pose;
  const std::size_t persons = fx.config.persons;
  const std::size_t d = pose_cfg.hidden;
  const std::size_t k5 = pose_cfg.pose_dim();
  const std::vector<posedata::Frame>& frames = fx.batch.front().frames;

  {
    ParameterSet p = subset(fx.model, "pose/part");
    report.modules.push_back(check(
        "part_encoders", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          const Var enc = posestream::encode_parts(
              tape, ps, pose_cfg, posestream::part_rows(tape, frames));
          return finish(tape, project(enc, seed + 100), mode);
        },
        seed));
  }
  {
    ParameterSet p = subset(fx.model, posestream::kAttentionPrefix);
    p.add("in/poses", random_tensor({persons, k5}, rng));
    p.add("in/h_prev", random_tensor({d}, rng));
    report.modules.push_back(check(
        "attention", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          const Var poses = tape.parameter(ps, "in/poses");
          const Var alpha = posestream::attention_weights(
              tape, ps, poses, tape.parameter(ps, "in/h_prev"));
          const Var l = posestream::select_pose(poses, alpha);
          return finish(tape, project(numcore::concat(std::vector{alpha, l}),
                                      seed + 101),
                        mode);
        },
        seed));
  }
  {
    const std::string cell = posestream::kPositionLstm + "/fw";
    ParameterSet p = subset(fx.model, cell);
    p.add("in/x0", random_tensor({k5}, rng));
    p.add("in/x1", random_tensor({k5}, rng));
    p.add("in/h", random_tensor({d}, rng));
    p.add("in/c", random_tensor({d}, rng));
    report.modules.push_back(check(
        "lstm_cell", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          const Var w = tape.parameter(ps, cell + "/w");
          const Var b = tape.parameter(ps, cell + "/b");
          posestream::LstmState s{tape.parameter(ps, "in/h"),
                                  tape.parameter(ps, "in/c")};
          s = posestream::lstm_step(w, b, tape.parameter(ps, "in/x0"), s);
          s = posestream::lstm_step(w, b, tape.parameter(ps, "in/x1"), s);
          return finish(tape,
                        project(numcore::concat(std::vector{s.h, s.c}),
                                seed + 102),
                        mode);
        },
        seed));
  }
  {
    ParameterSet p;
    for (std::size_t i = 0; i < 4; ++i) {
      p.add("in/state" + std::to_string(i), random_tensor({d}, rng));
    }
    report.modules.push_back(check(
        "lookback", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          std::vector<Var> states;
          for (std::size_t i = 0; i < 4; ++i) {
            states.push_back(tape.parameter(ps, "in/state" + std::to_string(i)));
          }
          const Var out =
              posestream::lookback_output(states, pose_cfg.lookback);
          return finish(tape, project(out, seed + 103), mode);
        },
        seed));
  }
  {
    objectstream::ConvStubConfig cc = fx.config.conv_config();
    ParameterSet p;
    std::mt19937_64 init(seed + 2);
    objectstream::init_conv_stub(p, cc, init);
    lift_biases(p, init);
    p.add("in/raster",
          random_tensor({4 * cc.out_height, 4 * cc.out_width, cc.in_channels},
                        rng));
    report.modules.push_back(check(
        "conv_stub", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          const Var grid = objectstream::tiny_conv_forward(
              tape, ps, cc, tape.parameter(ps, "in/raster"));
          return finish(tape,
                        project(objectstream::grid_objects(grid), seed + 104),
                        mode);
        },
        seed));
  }
  {
    ParameterSet p = subset(fx.model, relnet::kRelationPrefix);
    const std::size_t half = fx.config.pose_output_dim();
    const std::size_t objects = fx.config.object_height * fx.config.object_width;
    p.add("in/h_l", random_tensor({half}, rng));
    p.add("in/h_v", random_tensor({half}, rng));
    p.add("in/objects", random_tensor({objects, fx.config.object_depth}, rng));
    for (double& v : p.at("in/objects").values()) v = std::abs(v);
    report.modules.push_back(check(
        "relation_g_f", p,
        [&](ParameterSet& ps, GradMode mode) {
          Tape tape;
          const relnet::RelationOutputs out = relnet::relation_forward(
              tape, ps, fx.config.relation, tape.parameter(ps, "in/h_l"),
              tape.parameter(ps, "in/h_v"), tape.parameter(ps, "in/objects"),
              fx.config.num_classes);
          return finish(tape, numcore::cross_entropy(out.logits, 1), mode);
        },
        seed));
  }

  // A head is its classifier plus the cross-entropy on top; everything
  // upstream is held fixed here and covered by the end-to-end check.
  const auto head_check = [&](const std::string& module, Fixture& f,
                              training::LossFlags flags,
                              const std::string& trainable) {
    f.model.set_group_frozen("", true);
    f.model.set_group_frozen(trainable, false);
    ModuleCheck c = check(
        module, f.model,
        [&f, flags](ParameterSet& ps, GradMode mode) {
          return training::total_loss(f.batch, ps, f.config, flags,
                                      kWeightDecay,
                                      mode == GradMode::kAccumulate)
              .total;
        },
        seed);
    f.model.set_group_frozen("", false);
    return c;
  };
  report.modules.push_back(head_check("loss_position", fx,
                                      {true, false, false},
                                      training::kPositionHead));
  report.modules.push_back(head_check("loss_velocity", fx,
                                      {false, true, false},
                                      training::kVelocityHead));
  report.modules.push_back(head_check("loss_relation", fx,
                                      {false, false, true}, "relation/cls"));

  Fixture stub = make_fixture(seed + 7, true);
  report.modules.push_back(head_check("end_to_end", stub, {}, ""));
  return report;
}

nlohmann::json gradcheck_to_json(const GradSuiteReport& report) {
  nlohmann::json modules = nlohmann::json::array();
  for (const ModuleCheck& m : report.modules) {
    modules.push_back({{"module", m.module},
                       {"max_rel_error", m.max_rel_error},
                       {"coordinates", m.coordinates},
                       {"worst_tensor", m.worst_tensor},
                       {"analytic_at_max", m.analytic_at_max},
                       {"numeric_at_max", m.numeric_at_max},
                       {"pass", m.max_rel_error < report.tolerance}});
  }
  return {{"tolerance", report.tolerance},
          {"max_rel_error", report.max_rel_error()},
          {"verdict", report.passed() ? "PASS" : "FAIL"},
          {"modules", std::move(modules)}};
}

}  // namespace psrn::cli
