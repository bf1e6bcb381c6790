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

#ifndef PSRN_POSEDATA_PREPROCESS_HPP_
#define PSRN_POSEDATA_PREPROCESS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psrn/posedata/pose.hpp"

namespace psrn::posedata {

// Largest per-frame detection count over every frame of every sequence.
// Throws DataError when no frame holds a detection.
std::size_t scan_max_persons(std::span<const PoseSequence> dataset);

// Pads each frame to exactly `persons` poses (virtual all-(0,0) poses appended
// after the real detections) and zeroes the coordinates of absent keypoints.
// Throws DataError on a frame with more than `persons` detections.
PoseSequence fill_poses(const PoseSequence& sequence, std::size_t persons);

// Pixel coordinates -> [0, 1] by image width/height, clamped. Absent keypoints
// stay at (0, 0). Throws FormatError on nonpositive image dimensions.
PoseSequence normalize_positions(const PoseSequence& sequence);

// (x, y) pairs of each partition group, in group order.
std::array<std::vector<double>, kNumParts> partition_parts(
    const Pose& pose,
    const PartPartition& partition = PartPartition::standard());

struct FrameSample {
  // Source frame indices, ascending.
  std::vector<std::size_t> indices;
  // Source index of the frame handed to the object stream; one of `indices`.
  std::size_t object_frame = 0;
  PoseSequence clip;
};

// Draws `frames` indices uniformly without replacement (or with replacement
// when the video is shorter), sorted ascending, plus one object-stream frame
// drawn from the chosen indices. Deterministic in `seed`.
FrameSample sample_frames(const PoseSequence& sequence, std::size_t frames,
                          std::uint64_t seed);

}  // namespace psrn::posedata

#endif  // PSRN_POSEDATA_PREPROCESS_HPP_
