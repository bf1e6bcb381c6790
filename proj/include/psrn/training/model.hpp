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

#ifndef PSRN_TRAINING_MODEL_HPP_
#define PSRN_TRAINING_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tape.hpp"
#include "psrn/objectstream/conv_stub.hpp"
#include "psrn/posedata/io.hpp"
#include "psrn/posestream/stream.hpp"
#include "psrn/relnet/relation.hpp"

namespace psrn::training {

using numcore::ParameterSet;
using numcore::Tape;
using numcore::Var;

struct ModelConfig {
  std::size_t num_classes = 15;
  // N; 0 means "scan the dataset for the largest per-frame count".
  std::size_t persons = 0;
  // T frames sampled per clip.
  std::size_t frames = 10;
  posestream::PoseStreamConfig pose;
  relnet::RelationConfig relation;
  // Object grid H x W x D.
  std::size_t object_height = 7;
  std::size_t object_width = 7;
  std::size_t object_depth = 512;
  // Compute objects from rasters with the trainable stub instead of reading
  // precomputed feature maps.
  bool conv_stub = false;
  std::size_t conv_hidden = 8;

  objectstream::ConvStubConfig conv_config() const;
  std::size_t pose_output_dim() const { return pose.output_dim(); }

  // Full widths: K = 100, d = 512, A = 128, 512-wide relation MLPs.
  static ModelConfig full();
  // Small widths that train in minutes on one CPU core.
  static ModelConfig desk();
};

// Parameter groups, by name prefix.
inline const std::string kPoseGroup = "pose/";
inline const std::string kObjectGroup = "object/";
inline const std::string kRelationGroup = "relation/";

inline const std::string kPositionHead = "pose/pos_cls";
inline const std::string kVelocityHead = "pose/vel_cls";

void init_model(ParameterSet& params, const ModelConfig& config,
                std::mt19937_64& rng);

// A video after filling to N persons and normalizing to [0, 1].
struct PreparedVideo {
  std::string video_id;
  std::optional<int> label;
  std::optional<int> signal_person;
  std::vector<posedata::Frame> frames;
  // [H*W x D] objects from the feature map, and the raster for the stub.
  std::optional<numcore::TensorBuffer> objects;
  std::optional<numcore::TensorBuffer> raster;
};

PreparedVideo prepare_video(const posedata::Video& video, std::size_t persons);

std::vector<PreparedVideo> prepare_split(const posedata::Dataset& dataset,
                                         posedata::Split split,
                                         std::size_t persons);

// Resolves persons == 0 by scanning every video of the dataset.
std::size_t resolve_persons(const ModelConfig& config,
                            const posedata::Dataset& dataset);

struct Sample {
  const PreparedVideo* video = nullptr;
  std::vector<posedata::Frame> frames;
  // Source index of the frame that would feed the object stream. Each video
  // carries a single feature map, so it is recorded but not used to index.
  std::size_t object_frame = 0;
};

Sample draw_sample(const PreparedVideo& video, std::size_t frames,
                   std::uint64_t seed);

struct ModelForward {
  posestream::StreamOutputs streams;
  Var position_logits;
  Var velocity_logits;
  std::optional<relnet::RelationOutputs> relation;
};

// Runs the pose streams and both pose heads; the relation head only when
// `with_relation` (throws DataError if the sample has no objects then).
ModelForward model_forward(Tape& tape, ParameterSet& params,
                           const ModelConfig& config, const Sample& sample,
                           bool with_relation);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_MODEL_HPP_
