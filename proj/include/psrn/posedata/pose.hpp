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

#ifndef PSRN_POSEDATA_POSE_HPP_
#define PSRN_POSEDATA_POSE_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace psrn::posedata {

inline constexpr std::size_t kNumKeypoints = 14;

// Canonical keypoint order of the pose files.
enum Joint : std::size_t {
  kHeadTop = 0,
  kNeck,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
};

const char* joint_name(std::size_t joint);

// Absent keypoints carry x = y = 0 exactly.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  bool present = false;

  bool operator==(const Keypoint&) const = default;
};

using Pose = std::array<Keypoint, kNumKeypoints>;
using Frame = std::vector<Pose>;

// All-(0,0), all-absent pose used to pad frames up to N persons.
Pose virtual_pose();
bool is_virtual(const Pose& pose);

struct PoseSequence {
  std::string video_id;
  std::optional<int> label;
  int width = 0;
  int height = 0;
  std::vector<Frame> frames;
  // Synthetic data records which detection slot carries the action signal.
  std::optional<int> signal_person;

  bool operator==(const PoseSequence&) const = default;
};

// Five keypoint groups; shoulders appear in both the head group and their
// arm group so the part dims come out as (8, 6, 6, 6, 6).
struct PartPartition {
  std::array<std::vector<std::size_t>, 5> groups;

  static const PartPartition& standard();
  std::size_t part_dim(std::size_t part) const { return 2 * groups[part].size(); }
  std::size_t total_dim() const;
};

inline constexpr std::size_t kNumParts = 5;
const char* part_name(std::size_t part);

}  // namespace psrn::posedata

#endif  // PSRN_POSEDATA_POSE_HPP_
