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

#ifndef PSRN_POSEDATA_IO_HPP_
#define PSRN_POSEDATA_IO_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psrn/objectstream/feature_map.hpp"
#include "psrn/posedata/pose.hpp"

namespace psrn::posedata {

// Pose files are line-delimited JSON, one video per line:
//   {"video_id": "...", "label": 3 | null, "width": 320, "height": 240,
//    "frames": [[person, ...], ...]}
// where each person is an array of 14 [x, y, confidence] triples (pixels) or
// null for a missing keypoint. Confidences are parsed and discarded. An
// optional "signal_person" integer is carried through for synthetic data.
PoseSequence parse_pose_record(const std::string& line);
std::string format_pose_record(const PoseSequence& sequence);

std::vector<PoseSequence> read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path,
                     std::span<const PoseSequence> sequences);

enum class Split { kTrain, kTest };

std::string split_name(Split split);
Split parse_split(const std::string& name);

struct ManifestEntry {
  std::string video_id;
  Split split = Split::kTrain;
  std::string pose_path;
  std::string featmap_path;
  // Optional image raster consumed by the convolution stub.
  std::string raster_path;
};

// Paths inside a manifest are relative to the manifest file's directory.
struct Manifest {
  int num_classes = 0;
  std::vector<ManifestEntry> entries;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string format_manifest(const Manifest& manifest);

struct Video {
  PoseSequence poses;
  Split split = Split::kTrain;
  std::optional<objectstream::FeatureMap> feature_map;
  std::optional<objectstream::FeatureMap> raster;
};

struct Dataset {
  int num_classes = 0;
  std::vector<Video> videos;

  std::vector<const Video*> split(Split which) const;
};

// Loads every manifest entry with its pose record and (when listed) feature
// map and raster. Throws DataError when a listed video is missing from its
// pose file.
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace psrn::posedata

#endif  // PSRN_POSEDATA_IO_HPP_
