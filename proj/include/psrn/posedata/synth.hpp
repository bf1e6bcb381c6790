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

#ifndef PSRN_POSEDATA_SYNTH_HPP_
#define PSRN_POSEDATA_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "psrn/objectstream/feature_map.hpp"
#include "psrn/posedata/io.hpp"
#include "psrn/posedata/pose.hpp"

namespace psrn::posedata {

// Synthetic multi-person action clips. Every class owns a keypoint trajectory
// family (a static posture plus per-part sinusoidal motion) that is carried by
// one full-size "signal" person; the remaining persons are smaller distractors
// doing random, class-independent motion under a random-walk drift.
//
// The first `ambiguous_pairs` class pairs (0,1), (2,3), ... share one family,
// so pose alone cannot separate them; only a class-specific pattern planted
// into one cell of the feature map tells them apart.
//
// With `split_cues`, the remaining classes differ from the shared base family
// either in posture only or in motion only (alternating), so position and
// velocity cues carry complementary information.
struct SynthConfig {
  int num_classes = 4;
  std::size_t persons = 2;
  std::size_t min_frames = 12;
  std::size_t max_frames = 20;
  std::size_t train_per_class = 50;
  std::size_t test_per_class = 20;
  std::size_t map_height = 4;
  std::size_t map_width = 4;
  std::size_t map_depth = 32;
  std::size_t ambiguous_pairs = 0;
  bool split_cues = false;
  bool rasters = false;
  std::size_t raster_scale = 4;
  int image_width = 320;
  int image_height = 240;
  double keypoint_noise = 0.004;
  double missing_keypoint_rate = 0.02;
  double missing_person_rate = 0.03;
  double distractor_scale = 0.6;
  double map_noise = 1.0;
  double pattern_strength = 1.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthVideo {
  PoseSequence poses;
  Split split = Split::kTrain;
  objectstream::FeatureMap feature_map;
  std::optional<objectstream::FeatureMap> raster;
};

struct SynthDataset {
  int num_classes = 0;
  std::vector<SynthVideo> videos;
};

SynthDataset synth_generate(const SynthConfig& config);

// Writes poses/{train,test}.jsonl, featmaps/<id>.fmap, optional
// rasters/<id>.fmap and manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_synth_dataset(const SynthDataset& dataset,
                                          const std::filesystem::path& dir);

// Converts the in-memory result to the loaded-dataset form without files.
Dataset to_dataset(const SynthDataset& dataset);

}  // namespace psrn::posedata

#endif  // PSRN_POSEDATA_SYNTH_HPP_
