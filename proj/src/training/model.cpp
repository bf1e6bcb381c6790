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

#include "psrn/training/model.hpp"

#include <array>

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/mlp.hpp"
#include "psrn/numcore/ops.hpp"
#include "psrn/posedata/preprocess.hpp"

namespace psrn::training {

using numcore::TensorBuffer;

objectstream::ConvStubConfig ModelConfig::conv_config() const {
  objectstream::ConvStubConfig c;
  c.hidden_channels = conv_hidden;
  c.out_height = object_height;
  c.out_width = object_width;
  c.out_depth = object_depth;
  return c;
}

ModelConfig ModelConfig::full() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.num_classes = 4;
  c.pose.part_hidden = 16;
  c.pose.hidden = 32;
  c.pose.attention = 16;
  c.relation.width = 64;
  c.object_height = 4;
  c.object_width = 4;
  c.object_depth = 32;
  return c;
}

namespace {

numcore::MlpSpec head_spec(const std::string& prefix,
                           const ModelConfig& config) {
  numcore::MlpSpec spec;
  spec.prefix = prefix;
  spec.input_dim = config.pose_output_dim();
  spec.widths = {config.num_classes};
  spec.activate_last = false;
  return spec;
}

}  // namespace

void init_model(ParameterSet& params, const ModelConfig& config,
                std::mt19937_64& rng) {
  if (config.num_classes < 2) throw ConfigError("need at least 2 classes");
  if (config.frames < 2) throw ConfigError("need T >= 2 sampled frames");
  posestream::init_pose_stream(params, config.pose, rng);
  numcore::init_mlp(params, head_spec(kPositionHead, config), rng);
  numcore::init_mlp(params, head_spec(kVelocityHead, config), rng);
  if (config.conv_stub) {
    objectstream::init_conv_stub(params, config.conv_config(), rng);
  }
  relnet::init_relation(params, config.relation, 2 * config.pose_output_dim(),
                        config.object_depth, config.num_classes, rng);
}

PreparedVideo prepare_video(const posedata::Video& video,
                            std::size_t persons) {
  PreparedVideo out;
  out.video_id = video.poses.video_id;
  out.label = video.poses.label;
  out.signal_person = video.poses.signal_person;
  out.frames = posedata::normalize_positions(
                   posedata::fill_poses(video.poses, persons))
                   .frames;
  if (video.feature_map) {
    out.objects = objectstream::extract_objects(*video.feature_map).objects;
  }
  if (video.raster) out.raster = video.raster->to_tensor();
  return out;
}

std::vector<PreparedVideo> prepare_split(const posedata::Dataset& dataset,
                                         posedata::Split split,
                                         std::size_t persons) {
  std::vector<PreparedVideo> out;
  for (const posedata::Video* v : dataset.split(split)) {
    out.push_back(prepare_video(*v, persons));
  }
  return out;
}

std::size_t resolve_persons(const ModelConfig& config,
                            const posedata::Dataset& dataset) {
  if (config.persons > 0) return config.persons;
  std::vector<posedata::PoseSequence> all;
  all.reserve(dataset.videos.size());
  for (const posedata::Video& v : dataset.videos) all.push_back(v.poses);
  return posedata::scan_max_persons(all);
}

Sample draw_sample(const PreparedVideo& video, std::size_t frames,
                   std::uint64_t seed) {
  posedata::PoseSequence seq;
  seq.video_id = video.video_id;
  seq.frames = video.frames;
  posedata::FrameSample fs = posedata::sample_frames(seq, frames, seed);
  Sample s;
  s.video = &video;
  s.frames = std::move(fs.clip.frames);
  s.object_frame = fs.object_frame;
  return s;
}

ModelForward model_forward(Tape& tape, ParameterSet& params,
                           const ModelConfig& config, const Sample& sample,
                           bool with_relation) {
  ModelForward out;
  out.streams =
      posestream::run_pose_streams(tape, params, config.pose, sample.frames);
  out.position_logits = numcore::mlp_forward(
      tape, params, head_spec(kPositionHead, config), out.streams.h_position);
  out.velocity_logits = numcore::mlp_forward(
      tape, params, head_spec(kVelocityHead, config), out.streams.h_velocity);
  if (!with_relation) return out;

  const PreparedVideo& video = *sample.video;
  Var objects;
  if (config.conv_stub) {
    if (!video.raster) {
      throw DataError("video '" + video.video_id +
                      "' has no raster for the convolution stub");
    }
    objects = objectstream::grid_objects(objectstream::tiny_conv_forward(
        tape, params, config.conv_config(), tape.constant(*video.raster)));
  } else {
    if (!video.objects) {
      throw DataError("video '" + video.video_id +
                      "' has no feature map but the relation loss is active");
    }
    if (video.objects->dim(1) != config.object_depth) {
      throw ConfigError("video '" + video.video_id + "' feature depth " +
                        std::to_string(video.objects->dim(1)) +
                        " != configured " +
                        std::to_string(config.object_depth));
    }
    objects = tape.constant(*video.objects);
  }
  out.relation = relnet::relation_forward(
      tape, params, config.relation, out.streams.h_position,
      out.streams.h_velocity, objects, config.num_classes);
  return out;
}

}  // namespace psrn::training
