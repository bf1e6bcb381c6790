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

#include "psrn/posedata/preprocess.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "psrn/numcore/error.hpp"

namespace psrn::posedata {

std::size_t scan_max_persons(std::span<const PoseSequence> dataset) {
  std::size_t best = 0;
  for (const PoseSequence& seq : dataset) {
    for (const Frame& frame : seq.frames) best = std::max(best, frame.size());
  }
  if (best == 0) {
    throw DataError("dataset has no pose detections in any frame");
  }
  return best;
}

PoseSequence fill_poses(const PoseSequence& sequence, std::size_t persons) {
  if (persons == 0) throw ConfigError("person count must be positive");
  PoseSequence out = sequence;
  for (std::size_t t = 0; t < out.frames.size(); ++t) {
    Frame& frame = out.frames[t];
    if (frame.size() > persons) {
      throw DataError("video '" + sequence.video_id + "' frame " +
                      std::to_string(t) + " has " +
                      std::to_string(frame.size()) +
                      " detections, capacity is " + std::to_string(persons));
    }
    for (Pose& pose : frame) {
      for (Keypoint& k : pose) {
        if (!k.present) k = Keypoint{};
      }
    }
    frame.resize(persons, virtual_pose());
  }
  return out;
}

PoseSequence normalize_positions(const PoseSequence& sequence) {
  if (sequence.width <= 0 || sequence.height <= 0) {
    throw FormatError("video '" + sequence.video_id +
                      "' has nonpositive image dimensions " +
                      std::to_string(sequence.width) + "x" +
                      std::to_string(sequence.height));
  }
  const double w = sequence.width;
  const double h = sequence.height;
  PoseSequence out = sequence;
  for (Frame& frame : out.frames) {
    for (Pose& pose : frame) {
      for (Keypoint& k : pose) {
        if (!k.present) {
          k = Keypoint{};
          continue;
        }
        k.x = std::clamp(k.x / w, 0.0, 1.0);
        k.y = std::clamp(k.y / h, 0.0, 1.0);
      }
    }
  }
  return out;
}

std::array<std::vector<double>, kNumParts> partition_parts(
    const Pose& pose, const PartPartition& partition) {
  std::array<std::vector<double>, kNumParts> parts;
  for (std::size_t p = 0; p < kNumParts; ++p) {
    parts[p].reserve(partition.part_dim(p));
    for (std::size_t joint : partition.groups[p]) {
      parts[p].push_back(pose[joint].x);
      parts[p].push_back(pose[joint].y);
    }
  }
  return parts;
}

FrameSample sample_frames(const PoseSequence& sequence, std::size_t frames,
                          std::uint64_t seed) {
  if (sequence.frames.empty()) {
    throw DataError("cannot sample frames from empty video '" +
                    sequence.video_id + "'");
  }
  if (frames == 0) throw ConfigError("frame count must be positive");
  std::mt19937_64 rng(seed);
  const std::size_t available = sequence.frames.size();
  FrameSample sample;
  if (available >= frames) {
    std::vector<std::size_t> all(available);
    std::iota(all.begin(), all.end(), std::size_t{0});
    // Selection sampling keeps the source order.
    std::sample(all.begin(), all.end(), std::back_inserter(sample.indices),
                frames, rng);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, available - 1);
    for (std::size_t i = 0; i < frames; ++i) sample.indices.push_back(pick(rng));
    std::sort(sample.indices.begin(), sample.indices.end());
  }
  std::uniform_int_distribution<std::size_t> which(0, frames - 1);
  sample.object_frame = sample.indices[which(rng)];

  sample.clip = sequence;
  sample.clip.frames.clear();
  for (std::size_t idx : sample.indices) {
    sample.clip.frames.push_back(sequence.frames[idx]);
  }
  return sample;
}

}  // namespace psrn::posedata
