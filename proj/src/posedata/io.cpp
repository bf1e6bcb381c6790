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

#include "psrn/posedata/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "psrn/numcore/error.hpp"

namespace psrn::posedata {

using nlohmann::json;

namespace {

Keypoint parse_keypoint(const json& j) {
  if (j.is_null()) return Keypoint{};
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() ||
      !j[1].is_number() || !j[2].is_number()) {
    throw FormatError("keypoint must be null or [x, y, confidence]");
  }
  return Keypoint{j[0].get<double>(), j[1].get<double>(), true};
}

Pose parse_person(const json& j) {
  if (!j.is_array() || j.size() != kNumKeypoints) {
    throw FormatError("person must be an array of " +
                      std::to_string(kNumKeypoints) + " keypoints");
  }
  Pose pose;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) pose[k] = parse_keypoint(j[k]);
  return pose;
}

}  // namespace

PoseSequence parse_pose_record(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  try {
    PoseSequence seq;
    seq.video_id = j.at("video_id").get<std::string>();
    const json& label = j.at("label");
    if (!label.is_null()) seq.label = label.get<int>();
    seq.width = j.at("width").get<int>();
    seq.height = j.at("height").get<int>();
    for (const json& frame : j.at("frames")) {
      Frame f;
      for (const json& person : frame) f.push_back(parse_person(person));
      seq.frames.push_back(std::move(f));
    }
    if (j.contains("signal_person") && !j["signal_person"].is_null()) {
      seq.signal_person = j["signal_person"].get<int>();
    }
    return seq;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed pose record: ") + e.what());
  }
}

std::string format_pose_record(const PoseSequence& seq) {
  json j;
  j["video_id"] = seq.video_id;
  j["label"] = seq.label ? json(*seq.label) : json(nullptr);
  j["width"] = seq.width;
  j["height"] = seq.height;
  json frames = json::array();
  for (const Frame& frame : seq.frames) {
    json persons = json::array();
    for (const Pose& pose : frame) {
      json kps = json::array();
      for (const Keypoint& k : pose) {
        kps.push_back(k.present ? json::array({k.x, k.y, 1.0}) : json(nullptr));
      }
      persons.push_back(std::move(kps));
    }
    frames.push_back(std::move(persons));
  }
  j["frames"] = std::move(frames);
  if (seq.signal_person) j["signal_person"] = *seq.signal_person;
  return j.dump();
}

std::vector<PoseSequence> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose file '" + path.string() + "'");
  std::vector<PoseSequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_pose_record(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

void write_pose_file(const std::filesystem::path& path,
                     std::span<const PoseSequence> sequences) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write pose file '" + path.string() + "'");
  for (const PoseSequence& seq : sequences) out << format_pose_record(seq) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split '" + name + "' (expected train or test)");
}

std::string format_manifest(const Manifest& manifest) {
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json je;
    je["video_id"] = e.video_id;
    je["split"] = split_name(e.split);
    je["pose_path"] = e.pose_path;
    je["featmap_path"] = e.featmap_path;
    if (!e.raster_path.empty()) je["raster_path"] = e.raster_path;
    entries.push_back(std::move(je));
  }
  json j;
  j["num_classes"] = manifest.num_classes;
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << format_manifest(manifest);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  try {
    json j = json::parse(in);
    Manifest m;
    m.num_classes = j.value("num_classes", 0);
    for (const json& je : j.at("entries")) {
      ManifestEntry e;
      e.video_id = je.at("video_id").get<std::string>();
      e.split = parse_split(je.at("split").get<std::string>());
      e.pose_path = je.at("pose_path").get<std::string>();
      e.featmap_path = je.value("featmap_path", std::string());
      e.raster_path = je.value("raster_path", std::string());
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest '" + path.string() + "': " + e.what());
  }
}

std::vector<const Video*> Dataset::split(Split which) const {
  std::vector<const Video*> out;
  for (const Video& v : videos) {
    if (v.split == which) out.push_back(&v);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const Manifest manifest = read_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  std::map<std::string, std::map<std::string, PoseSequence>> pose_files;
  Dataset data;
  data.num_classes = manifest.num_classes;
  for (const ManifestEntry& e : manifest.entries) {
    auto file_it = pose_files.find(e.pose_path);
    if (file_it == pose_files.end()) {
      std::map<std::string, PoseSequence> by_id;
      for (PoseSequence& seq : read_pose_file(base / e.pose_path)) {
        std::string id = seq.video_id;
        by_id.emplace(std::move(id), std::move(seq));
      }
      file_it = pose_files.emplace(e.pose_path, std::move(by_id)).first;
    }
    auto seq_it = file_it->second.find(e.video_id);
    if (seq_it == file_it->second.end()) {
      throw DataError("video '" + e.video_id + "' not found in pose file '" +
                      e.pose_path + "'");
    }
    Video video;
    video.poses = seq_it->second;
    video.split = e.split;
    if (!e.featmap_path.empty()) {
      video.feature_map = objectstream::load_feature_map(base / e.featmap_path);
    }
    if (!e.raster_path.empty()) {
      video.raster = objectstream::load_feature_map(base / e.raster_path);
    }
    data.videos.push_back(std::move(video));
  }
  return data;
}

}  // namespace psrn::posedata
