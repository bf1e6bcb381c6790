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

#ifndef PSRN_POSESTREAM_STREAM_HPP_
#define PSRN_POSESTREAM_STREAM_HPP_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psrn/numcore/mlp.hpp"
#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tape.hpp"
#include "psrn/posedata/pose.hpp"

namespace psrn::posestream {

using numcore::ParameterSet;
using numcore::Tape;
using numcore::Var;

enum class StreamMode { kUnidirectional, kBidirectional };

std::string mode_name(StreamMode mode);
StreamMode parse_mode(const std::string& name);

struct PoseStreamConfig {
  // K: width of both layers of every part encoder.
  std::size_t part_hidden = 100;
  // d: LSTM hidden size.
  std::size_t hidden = 512;
  // A: width of the attention scorer.
  std::size_t attention = 128;
  StreamMode mode = StreamMode::kBidirectional;
  std::size_t lookback = 5;
  // When false, l_t is the plain mean over persons and no scorer exists.
  bool use_attention = true;

  std::size_t pose_dim() const { return posedata::kNumParts * part_hidden; }
  std::size_t output_dim() const {
    return mode == StreamMode::kBidirectional ? 2 * hidden : hidden;
  }
  bool bidirectional() const { return mode == StreamMode::kBidirectional; }
};

inline const std::string kPosePrefix = "pose/";
inline const std::string kPositionLstm = "pose/pos_lstm";
inline const std::string kVelocityLstm = "pose/vel_lstm";
inline const std::string kAttentionPrefix = "pose/att";

numcore::MlpSpec part_encoder_spec(std::size_t part,
                                   const PoseStreamConfig& config);

// Part encoders, attention scorer and both recurrent streams. Weights are
// Glorot-uniform; LSTM forget-gate biases start at 1, other biases at 0.
void init_pose_stream(ParameterSet& params, const PoseStreamConfig& config,
                      std::mt19937_64& rng);

// Per-part row batches: for each part p a [rows x part_dim(p)] matrix.
using PartRows = std::array<Var, posedata::kNumParts>;

// Rows are frame-major, then person: row t * N + i is person i of frame t.
// Frames must already be filled to exactly N poses and normalized.
PartRows part_rows(Tape& tape, std::span<const posedata::Frame> frames);

// Per-part 2-layer ReLU encoders, concatenated: [rows x 5K].
Var encode_parts(Tape& tape, ParameterSet& params,
                 const PoseStreamConfig& config, const PartRows& parts);

// alpha_t = softmax_i(v . tanh(W_L L_{t,i} + W_h h_prev + b)), length N.
Var attention_weights(Tape& tape, ParameterSet& params, Var poses, Var h_prev);

// sum_i alpha_i L_{t,i}.
Var select_pose(Var poses, Var alpha);

struct LstmState {
  Var h;
  Var c;
};

// Gates from one affine map of concat(h_prev, x) -> 4d, split as
// (i, f, o, g); c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_step(Var weights, Var bias, Var x, LstmState prev);

// Mean of the last min(n, T) states.
Var lookback_output(std::span<const Var> states, std::size_t n);

// Runs one LSTM (prefix "<stream>/fw" or "<stream>/bw") over `inputs` from
// zero state and returns every hidden state in processing order.
std::vector<Var> run_lstm(Tape& tape, ParameterSet& params,
                          const std::string& cell_prefix,
                          std::span<const Var> inputs);

// Forward (and, in bidirectional mode, backward over the reversed inputs)
// LSTMs with lookback readout; bidirectional output is concat(fw, bw).
Var run_recurrent(Tape& tape, ParameterSet& params,
                  const PoseStreamConfig& config, const std::string& stream,
                  std::span<const Var> inputs);

struct PositionStream {
  Var h;
  // One length-N weight vector and one selected pose per frame.
  std::vector<Var> alpha;
  std::vector<Var> selected;
};

// `poses` is the encoded [T*N x 5K] matrix. Attention at step t is
// conditioned on the forward cell's previous hidden state; the selected
// sequence is shared by both directions.
PositionStream run_position_stream(Tape& tape, ParameterSet& params,
                                   const PoseStreamConfig& config, Var poses,
                                   std::size_t frames, std::size_t persons);

// V_t = l_{t+1} - l_t; throws DataError when fewer than two inputs.
std::vector<Var> compute_velocities(std::span<const Var> selected);

Var run_velocity_stream(Tape& tape, ParameterSet& params,
                        const PoseStreamConfig& config,
                        std::span<const Var> velocities);

struct StreamOutputs {
  Var h_position;
  Var h_velocity;
  std::vector<Var> alpha;
  std::vector<Var> selected;
};

// Full pose stream over one clip of T >= 2 filled, normalized frames.
StreamOutputs run_pose_streams(Tape& tape, ParameterSet& params,
                               const PoseStreamConfig& config,
                               std::span<const posedata::Frame> frames);

// Rows of T x N attention weights as plain numbers.
std::vector<std::vector<double>> attention_matrix(const Tape& tape,
                                                  std::span<const Var> alpha);

// CSV: video_id,t,person_index,alpha (header written when requested).
void write_attention_csv(std::ostream& out, const std::string& video_id,
                         const std::vector<std::vector<double>>& alpha,
                         bool header);

}  // namespace psrn::posestream

#endif  // PSRN_POSESTREAM_STREAM_HPP_
