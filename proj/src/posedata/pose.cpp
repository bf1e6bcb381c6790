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

#include "psrn/posedata/pose.hpp"

#include <algorithm>

namespace psrn::posedata {

const char* joint_name(std::size_t joint) {
  static constexpr const char* kNames[kNumKeypoints] = {
      "head_top",   "neck",      "r_shoulder", "r_elbow", "r_wrist",
      "l_shoulder", "l_elbow",   "l_wrist",    "r_hip",   "r_knee",
      "r_ankle",    "l_hip",     "l_knee",     "l_ankle"};
  return joint < kNumKeypoints ? kNames[joint] : "unknown";
}

Pose virtual_pose() { return Pose{}; }

bool is_virtual(const Pose& pose) {
  return std::none_of(pose.begin(), pose.end(),
                      [](const Keypoint& k) { return k.present; });
}

const PartPartition& PartPartition::standard() {
  static const PartPartition kStandard{{{
      {kHeadTop, kNeck, kRightShoulder, kLeftShoulder},
      {kRightShoulder, kRightElbow, kRightWrist},
      {kLeftShoulder, kLeftElbow, kLeftWrist},
      {kRightHip, kRightKnee, kRightAnkle},
      {kLeftHip, kLeftKnee, kLeftAnkle},
  }}};
  return kStandard;
}

std::size_t PartPartition::total_dim() const {
  std::size_t total = 0;
  for (std::size_t p = 0; p < groups.size(); ++p) total += part_dim(p);
  return total;
}

const char* part_name(std::size_t part) {
  static constexpr const char* kNames[kNumParts] = {"head", "r_arm", "l_arm",
                                                   "r_leg", "l_leg"};
  return part < kNumParts ? kNames[part] : "unknown";
}

}  // namespace psrn::posedata
