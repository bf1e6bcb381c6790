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

#include "psrn/posestream/stream.hpp"

#include <algorithm>
#include <ostream>

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/ops.hpp"
#include "psrn/posedata/preprocess.hpp"

namespace psrn::posestream {

using numcore::TensorBuffer;

std::string mode_name(StreamMode mode) {
  return mode == StreamMode::kBidirectional ? "bi" : "uni";
}

StreamMode parse_mode(const std::string& name) {
  if (name == "bi" || name == "bidirectional") return StreamMode::kBidirectional;
  if (name == "uni" || name == "unidirectional") {
    return StreamMode::kUnidirectional;
  }
  throw ConfigError("unknown stream mode '" + name + "' (expected uni or bi)");
}

numcore::MlpSpec part_encoder_spec(std::size_t part,
                                   const PoseStreamConfig& config) {
  numcore::MlpSpec spec;
  spec.prefix = kPosePrefix + "part" + std::to_string(part);
  spec.input_dim = posedata::PartPartition::standard().part_dim(part);
  spec.widths = {config.part_hidden, config.part_hidden};
  spec.activation = numcore::Activation::kRelu;
  spec.activate_last = true;
  return spec;
}

namespace {

void init_lstm(ParameterSet& params, const std::string& prefix,
               std::size_t input, std::size_t hidden, std::mt19937_64& rng) {
  const std::size_t fan_in = input + hidden;
  params.add(prefix + "/w", numcore::glorot_uniform({4 * hidden, fan_in},
                                                    fan_in, 4 * hidden, rng));
  TensorBuffer bias({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias.values()[i] = 1.0;
  params.add(prefix + "/b", std::move(bias));
}

void init_stream(ParameterSet& params, const std::string& stream,
                 const PoseStreamConfig& config, std::mt19937_64& rng) {
  init_lstm(params, stream + "/fw", config.pose_dim(), config.hidden, rng);
  if (config.bidirectional()) {
    init_lstm(params, stream + "/bw", config.pose_dim(), config.hidden, rng);
  }
}

}  // namespace

void init_pose_stream(ParameterSet& params, const PoseStreamConfig& config,
                      std::mt19937_64& rng) {
  if (config.part_hidden == 0 || config.hidden == 0 || config.lookback == 0 ||
      (config.use_attention && config.attention == 0)) {
    throw ConfigError("pose stream widths and lookback must be positive");
  }
  for (std::size_t p = 0; p < posedata::kNumParts; ++p) {
    numcore::init_mlp(params, part_encoder_spec(p, config), rng);
  }
  if (config.use_attention) {
    const std::size_t a = config.attention;
    const std::size_t k = config.pose_dim();
    const std::size_t d = config.hidden;
    params.add(kAttentionPrefix + "/wl",
               numcore::glorot_uniform({a, k}, k, a, rng));
    params.add(kAttentionPrefix + "/wh",
               numcore::glorot_uniform({a, d}, d, a, rng));
    params.add(kAttentionPrefix + "/b", TensorBuffer({a}));
    params.add(kAttentionPrefix + "/v",
               numcore::glorot_uniform({1, a}, a, 1, rng));
  }
  init_stream(params, kPositionLstm, config, rng);
  init_stream(params, kVelocityLstm, config, rng);
}

PartRows part_rows(Tape& tape, std::span<const posedata::Frame> frames) {
  const auto& partition = posedata::PartPartition::standard();
  std::size_t count = 0;
  for (const posedata::Frame& f : frames) count += f.size();
  if (count == 0) throw DataError("no poses to encode");
  std::array<TensorBuffer, posedata::kNumParts> buffers;
  for (std::size_t p = 0; p < posedata::kNumParts; ++p) {
    buffers[p] = TensorBuffer({count, partition.part_dim(p)});
  }
  std::size_t r = 0;
  for (const posedata::Frame& frame : frames) {
    for (const posedata::Pose& pose : frame) {
      const auto parts = posedata::partition_parts(pose, partition);
      for (std::size_t p = 0; p < posedata::kNumParts; ++p) {
        std::copy(parts[p].begin(), parts[p].end(),
                  buffers[p].values().begin() + r * parts[p].size());
      }
      ++r;
    }
  }
  PartRows out;
  for (std::size_t p = 0; p < posedata::kNumParts; ++p) {
    out[p] = tape.constant(std::move(buffers[p]));
  }
  return out;
}

Var encode_parts(Tape& tape, ParameterSet& params,
                 const PoseStreamConfig& config, const PartRows& parts) {
  std::array<Var, posedata::kNumParts> encoded;
  for (std::size_t p = 0; p < posedata::kNumParts; ++p) {
    const numcore::MlpSpec spec = part_encoder_spec(p, config);
    const numcore::Shape& shape = tape.shape(parts[p]);
    if (shape.empty() || shape.back() != spec.input_dim) {
      throw ConfigError("part " + std::string(posedata::part_name(p)) +
                        " expects " + std::to_string(spec.input_dim) +
                        " dims, got " + numcore::shape_string(shape));
    }
    encoded[p] = numcore::mlp_forward(tape, params, spec, parts[p]);
  }
  return numcore::concat(encoded);
}

Var attention_weights(Tape& tape, ParameterSet& params, Var poses, Var h_prev) {
  const Var wl = tape.parameter(params, kAttentionPrefix + "/wl");
  const Var wh = tape.parameter(params, kAttentionPrefix + "/wh");
  const Var b = tape.parameter(params, kAttentionPrefix + "/b");
  const Var v = tape.parameter(params, kAttentionPrefix + "/v");
  const Var projected = numcore::affine(poses, wl, std::nullopt);
  const Var context = numcore::affine(h_prev, wh, b);
  const Var hidden = numcore::tanh(numcore::add_rowwise(projected, context));
  const Var scores = numcore::affine(hidden, v, std::nullopt);
  return numcore::softmax(numcore::reshape(scores, {tape.shape(poses)[0]}));
}

Var select_pose(Var poses, Var alpha) {
  return numcore::weighted_sum_rows(alpha, poses);
}

LstmState lstm_step(Var weights, Var bias, Var x, LstmState prev) {
  const std::size_t d = prev.h.tape->shape(prev.h)[0];
  const std::array<Var, 2> joined = {prev.h, x};
  const Var z = numcore::affine(numcore::concat(joined), weights, bias);
  const Var i = numcore::sigmoid(numcore::slice(z, 0, d));
  const Var f = numcore::sigmoid(numcore::slice(z, d, d));
  const Var o = numcore::sigmoid(numcore::slice(z, 2 * d, d));
  const Var g = numcore::tanh(numcore::slice(z, 3 * d, d));
  const Var c = numcore::add(numcore::mul(f, prev.c), numcore::mul(i, g));
  return {numcore::mul(o, numcore::tanh(c)), c};
}

Var lookback_output(std::span<const Var> states, std::size_t n) {
  if (states.empty()) throw DataError("lookback over an empty sequence");
  if (n == 0) throw ConfigError("lookback must be positive");
  const std::size_t take = std::min(n, states.size());
  return numcore::mean(states.subspan(states.size() - take));
}

namespace {

LstmState zero_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(TensorBuffer({hidden})),
          tape.constant(TensorBuffer({hidden}))};
}

std::size_t hidden_size(ParameterSet& params, const std::string& cell) {
  return params.at(cell + "/b").size() / 4;
}

}  // namespace

std::vector<Var> run_lstm(Tape& tape, ParameterSet& params,
                          const std::string& cell_prefix,
                          std::span<const Var> inputs) {
  const Var w = tape.parameter(params, cell_prefix + "/w");
  const Var b = tape.parameter(params, cell_prefix + "/b");
  LstmState state = zero_state(tape, hidden_size(params, cell_prefix));
  std::vector<Var> states;
  states.reserve(inputs.size());
  for (const Var& x : inputs) {
    state = lstm_step(w, b, x, state);
    states.push_back(state.h);
  }
  return states;
}

Var run_recurrent(Tape& tape, ParameterSet& params,
                  const PoseStreamConfig& config, const std::string& stream,
                  std::span<const Var> inputs) {
  if (inputs.empty()) throw DataError("recurrent stream over empty sequence");
  const std::vector<Var> fw = run_lstm(tape, params, stream + "/fw", inputs);
  const Var out_fw = lookback_output(fw, config.lookback);
  if (!config.bidirectional()) return out_fw;
  const std::vector<Var> reversed(inputs.rbegin(), inputs.rend());
  const std::vector<Var> bw = run_lstm(tape, params, stream + "/bw", reversed);
  const std::array<Var, 2> halves = {out_fw,
                                     lookback_output(bw, config.lookback)};
  return numcore::concat(halves);
}

PositionStream run_position_stream(Tape& tape, ParameterSet& params,
                                   const PoseStreamConfig& config, Var poses,
                                   std::size_t frames, std::size_t persons) {
  if (frames == 0) throw DataError("position stream over an empty sequence");
  if (persons == 0) throw DataError("position stream needs >= 1 person");
  if (tape.shape(poses) !=
      numcore::Shape{frames * persons, config.pose_dim()}) {
    throw DimensionError("position stream expects " +
                         std::to_string(frames * persons) + " x " +
                         std::to_string(config.pose_dim()) + " poses, got " +
                         numcore::shape_string(tape.shape(poses)));
  }
  PositionStream out;
  const std::string fw_cell = kPositionLstm + "/fw";
  const Var w = tape.parameter(params, fw_cell + "/w");
  const Var b = tape.parameter(params, fw_cell + "/b");
  LstmState state = zero_state(tape, config.hidden);
  std::vector<Var> fw_states;
  Var uniform;
  if (!config.use_attention) {
    uniform = tape.constant(TensorBuffer(
        {persons}, std::vector<double>(persons, 1.0 / persons)));
  }
  for (std::size_t t = 0; t < frames; ++t) {
    const Var frame = numcore::rows(poses, t * persons, persons);
    const Var alpha = config.use_attention
                          ? attention_weights(tape, params, frame, state.h)
                          : uniform;
    const Var l = select_pose(frame, alpha);
    state = lstm_step(w, b, l, state);
    out.alpha.push_back(alpha);
    out.selected.push_back(l);
    fw_states.push_back(state.h);
  }
  out.h = lookback_output(fw_states, config.lookback);
  if (config.bidirectional()) {
    const std::vector<Var> reversed(out.selected.rbegin(),
                                    out.selected.rend());
    const std::vector<Var> bw =
        run_lstm(tape, params, kPositionLstm + "/bw", reversed);
    const std::array<Var, 2> halves = {out.h,
                                       lookback_output(bw, config.lookback)};
    out.h = numcore::concat(halves);
  }
  return out;
}

std::vector<Var> compute_velocities(std::span<const Var> selected) {
  if (selected.size() < 2) {
    throw DataError("velocity needs at least 2 frames, got " +
                    std::to_string(selected.size()));
  }
  std::vector<Var> out;
  out.reserve(selected.size() - 1);
  for (std::size_t t = 0; t + 1 < selected.size(); ++t) {
    out.push_back(numcore::sub(selected[t + 1], selected[t]));
  }
  return out;
}

Var run_velocity_stream(Tape& tape, ParameterSet& params,
                        const PoseStreamConfig& config,
                        std::span<const Var> velocities) {
  if (velocities.empty()) {
    throw DataError("velocity stream needs at least one velocity (T >= 2)");
  }
  return run_recurrent(tape, params, config, kVelocityLstm, velocities);
}

StreamOutputs run_pose_streams(Tape& tape, ParameterSet& params,
                               const PoseStreamConfig& config,
                               std::span<const posedata::Frame> frames) {
  if (frames.size() < 2) {
    throw DataError("pose streams need T >= 2 frames, got " +
                    std::to_string(frames.size()));
  }
  const std::size_t persons = frames.front().size();
  for (const posedata::Frame& f : frames) {
    if (f.size() != persons) {
      throw DataError("frames must be filled to a common person count");
    }
  }
  const Var poses =
      encode_parts(tape, params, config, part_rows(tape, frames));
  PositionStream pos = run_position_stream(tape, params, config, poses,
                                           frames.size(), persons);
  const std::vector<Var> velocities = compute_velocities(pos.selected);
  StreamOutputs out;
  out.h_position = pos.h;
  out.h_velocity = run_velocity_stream(tape, params, config, velocities);
  out.alpha = std::move(pos.alpha);
  out.selected = std::move(pos.selected);
  return out;
}

std::vector<std::vector<double>> attention_matrix(const Tape& tape,
                                                  std::span<const Var> alpha) {
  std::vector<std::vector<double>> out;
  out.reserve(alpha.size());
  for (const Var& a : alpha) {
    const auto values = tape.value(a).values();
    out.emplace_back(values.begin(), values.end());
  }
  return out;
}

void write_attention_csv(std::ostream& out, const std::string& video_id,
                         const std::vector<std::vector<double>>& alpha,
                         bool header) {
  if (header) out << "video_id,t,person_index,alpha\n";
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    for (std::size_t i = 0; i < alpha[t].size(); ++i) {
      out << video_id << ',' << t << ',' << i << ',' << alpha[t][i] << '\n';
    }
  }
}

}  // namespace psrn::posestream
