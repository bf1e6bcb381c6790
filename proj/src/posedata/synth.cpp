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

#include "psrn/posedata/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "psrn/numcore/error.hpp"

namespace psrn::posedata {

namespace {

using Rng = std::mt19937_64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PartMotion {
  double freq = 0.0;
  double phase = 0.0;
  double amp = 0.0;
  double angle = 0.0;
};

struct Family {
  std::array<std::array<double, 2>, kNumParts> posture{};
  std::array<PartMotion, kNumParts> motion{};
};

// Standing skeleton around the body center, body height ~0.5 image heights.
constexpr std::array<std::array<double, 2>, kNumKeypoints> kRestPose = {{
    {0.0, -0.25}, {0.0, -0.17},
    {-0.06, -0.15}, {-0.08, -0.05}, {-0.09, 0.04},
    {0.06, -0.15}, {0.08, -0.05}, {0.09, 0.04},
    {-0.04, 0.03}, {-0.045, 0.14}, {-0.05, 0.25},
    {0.04, 0.03}, {0.045, 0.14}, {0.05, 0.25},
}};

// Which limb drives each joint, and how strongly (extremities move most).
constexpr std::array<std::size_t, kNumKeypoints> kDrivingPart = {
    0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4};
constexpr std::array<double, kNumKeypoints> kDriveWeight = {
    1.0, 0.5, 0.15, 0.6, 1.0, 0.15, 0.6, 1.0, 0.1, 0.5, 1.0, 0.1, 0.5, 1.0};

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::array<double, 2> draw_posture_offset(Rng& rng) {
  const double mag = uniform(rng, 0.02, 0.06);
  const double ang = uniform(rng, 0.0, kTwoPi);
  return {mag * std::cos(ang), mag * std::sin(ang)};
}

PartMotion draw_motion(Rng& rng) {
  PartMotion m;
  m.freq = uniform(rng, 0.4, 1.4);
  m.phase = uniform(rng, 0.0, kTwoPi);
  m.amp = uniform(rng, 0.02, 0.07);
  m.angle = uniform(rng, 0.0, kTwoPi);
  return m;
}

void draw_posture(Rng& rng, Family& f) {
  for (auto& p : f.posture) p = draw_posture_offset(rng);
}

void draw_motions(Rng& rng, Family& f) {
  for (auto& m : f.motion) m = draw_motion(rng);
}

Family draw_family(Rng& rng) {
  Family f;
  draw_posture(rng, f);
  draw_motions(rng, f);
  return f;
}

std::vector<Family> class_families(const SynthConfig& cfg, Rng& rng) {
  const std::size_t classes = static_cast<std::size_t>(cfg.num_classes);
  const std::size_t ambiguous = 2 * cfg.ambiguous_pairs;
  std::vector<Family> out(classes);
  const Family base = draw_family(rng);
  for (std::size_t c = 0; c < classes; ++c) {
    if (c < ambiguous) {
      if (c % 2 == 1) {
        out[c] = out[c - 1];
      } else {
        out[c] = cfg.split_cues ? base : draw_family(rng);
      }
      continue;
    }
    if (!cfg.split_cues) {
      out[c] = draw_family(rng);
      continue;
    }
    out[c] = base;
    if ((c - ambiguous) % 2 == 0) {
      draw_posture(rng, out[c]);
    } else {
      draw_motions(rng, out[c]);
    }
  }
  return out;
}

std::vector<std::vector<double>> class_patterns(const SynthConfig& cfg,
                                                std::size_t width, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(cfg.num_classes));
  for (std::size_t c = 0; c < 2 * cfg.ambiguous_pairs; ++c) {
    out[c].resize(width);
    for (double& v : out[c]) v = cfg.pattern_strength * gauss(rng);
  }
  return out;
}

// Per-video instance of a family: placement, size and small jitters.
struct Actor {
  const Family* family = nullptr;
  double cx = 0.5;
  double cy = 0.5;
  double scale = 1.0;
  double vx = 0.0;
  double vy = 0.0;
  double walk = 0.0;
  std::array<double, kNumParts> phase_jitter{};
  std::array<double, kNumParts> amp_jitter{};
  std::array<double, kNumParts> freq_jitter{};
};

Actor make_actor(const Family& family, double scale, bool signal, Rng& rng) {
  Actor a;
  a.family = &family;
  a.scale = scale * uniform(rng, 0.9, 1.1);
  if (signal) {
    a.cx = uniform(rng, 0.35, 0.65);
    a.cy = uniform(rng, 0.45, 0.55);
    a.vx = uniform(rng, -0.004, 0.004);
    a.vy = uniform(rng, -0.002, 0.002);
  } else {
    a.cx = uniform(rng, 0.15, 0.85);
    a.cy = uniform(rng, 0.4, 0.6);
    a.walk = 0.008;
  }
  for (std::size_t p = 0; p < kNumParts; ++p) {
    a.phase_jitter[p] = uniform(rng, -0.4, 0.4);
    a.amp_jitter[p] = uniform(rng, 0.85, 1.15);
    a.freq_jitter[p] = uniform(rng, 0.9, 1.1);
  }
  return a;
}

void advance(Actor& a, Rng& rng) {
  a.cx += a.vx;
  a.cy += a.vy;
  if (a.walk > 0.0) {
    std::normal_distribution<double> step(0.0, a.walk);
    a.cx += step(rng);
    a.cy += step(rng);
  }
}

Pose render(const Actor& a, std::size_t t, const SynthConfig& cfg, Rng& rng) {
  std::normal_distribution<double> noise(0.0, cfg.keypoint_noise);
  std::bernoulli_distribution missing(cfg.missing_keypoint_rate);
  Pose pose;
  for (std::size_t j = 0; j < kNumKeypoints; ++j) {
    const std::size_t p = kDrivingPart[j];
    const PartMotion& m = a.family->motion[p];
    const double w = kDriveWeight[j];
    const double swing =
        m.amp * a.amp_jitter[p] *
        std::sin(m.freq * a.freq_jitter[p] * static_cast<double>(t) + m.phase +
                 a.phase_jitter[p]);
    const double dx = kRestPose[j][0] + w * (a.family->posture[p][0] +
                                             swing * std::cos(m.angle));
    const double dy = kRestPose[j][1] + w * (a.family->posture[p][1] +
                                             swing * std::sin(m.angle));
    const double x = a.cx + a.scale * dx + noise(rng);
    const double y = a.cy + a.scale * dy + noise(rng);
    if (missing(rng)) continue;
    // Pixel coordinates at 1/100 pixel keep the files compact.
    pose[j].x = std::round(x * cfg.image_width * 100.0) / 100.0;
    pose[j].y = std::round(y * cfg.image_height * 100.0) / 100.0;
    pose[j].present = true;
  }
  return pose;
}

Rng video_rng(std::uint64_t seed, Split split, std::size_t label,
              std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(split == Split::kTrain ? 1 : 2),
                    static_cast<std::uint32_t>(label),
                    static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

SynthVideo make_video(const SynthConfig& cfg, const Family& family,
                      const std::vector<double>& pattern, Split split,
                      std::size_t label, std::size_t index) {
  Rng rng = video_rng(cfg.seed, split, label, index);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthVideo v;
  v.split = split;
  PoseSequence& seq = v.poses;
  seq.video_id = split_name(split) + "_c" + std::to_string(label) + "_" +
                 std::to_string(index);
  seq.label = static_cast<int>(label);
  seq.width = cfg.image_width;
  seq.height = cfg.image_height;

  const std::size_t frames = std::uniform_int_distribution<std::size_t>(
      cfg.min_frames, cfg.max_frames)(rng);
  const std::size_t signal =
      std::uniform_int_distribution<std::size_t>(0, cfg.persons - 1)(rng);
  seq.signal_person = static_cast<int>(signal);

  std::vector<Family> distractor_families;
  distractor_families.reserve(cfg.persons);
  for (std::size_t s = 0; s < cfg.persons; ++s) {
    distractor_families.push_back(draw_family(rng));
  }
  std::vector<Actor> actors;
  for (std::size_t s = 0; s < cfg.persons; ++s) {
    actors.push_back(s == signal
                         ? make_actor(family, 1.0, true, rng)
                         : make_actor(distractor_families[s],
                                      cfg.distractor_scale, false, rng));
  }

  // Dropped detections only ever come off the end of a frame, after the
  // signal slot, so the signal person's slot index stays fixed.
  std::bernoulli_distribution drop(cfg.missing_person_rate);
  for (std::size_t t = 0; t < frames; ++t) {
    Frame frame;
    for (std::size_t s = 0; s < cfg.persons; ++s) {
      frame.push_back(render(actors[s], t, cfg, rng));
      advance(actors[s], rng);
    }
    if (frame.size() - 1 > signal && drop(rng)) frame.pop_back();
    seq.frames.push_back(std::move(frame));
  }

  objectstream::FeatureMap map(cfg.map_height, cfg.map_width, cfg.map_depth);
  for (float& x : map.values) x = static_cast<float>(cfg.map_noise * gauss(rng));
  const std::size_t ph =
      std::uniform_int_distribution<std::size_t>(0, cfg.map_height - 1)(rng);
  const std::size_t pw =
      std::uniform_int_distribution<std::size_t>(0, cfg.map_width - 1)(rng);
  if (!pattern.empty()) {
    for (std::size_t c = 0; c < cfg.map_depth; ++c) {
      map.at(ph, pw, c) += static_cast<float>(pattern[c]);
    }
  }
  v.feature_map = std::move(map);

  if (cfg.rasters) {
    const std::size_t k = cfg.raster_scale;
    objectstream::FeatureMap raster(cfg.map_height * k, cfg.map_width * k, 3);
    for (float& x : raster.values) {
      x = static_cast<float>(0.5 * cfg.map_noise * gauss(rng));
    }
    if (!pattern.empty()) {
      for (std::size_t y = ph * k; y < (ph + 1) * k; ++y) {
        for (std::size_t x = pw * k; x < (pw + 1) * k; ++x) {
          for (std::size_t c = 0; c < 3; ++c) {
            raster.at(y, x, c) += static_cast<float>(2.0 * pattern[c]);
          }
        }
      }
    }
    v.raster = std::move(raster);
  }
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic data needs >= 2 classes");
  if (2 * ambiguous_pairs > static_cast<std::size_t>(num_classes)) {
    throw ConfigError(std::to_string(ambiguous_pairs) +
                      " ambiguous pairs need " +
                      std::to_string(2 * ambiguous_pairs) + " classes, have " +
                      std::to_string(num_classes));
  }
  if (persons == 0) throw ConfigError("synthetic data needs >= 1 person");
  if (min_frames == 0 || min_frames > max_frames) {
    throw ConfigError("frame range must satisfy 0 < min_frames <= max_frames");
  }
  if (map_height == 0 || map_width == 0 || map_depth == 0) {
    throw ConfigError("feature map extents must be positive");
  }
  if (rasters && raster_scale == 0) {
    throw ConfigError("raster scale must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("image dimensions must be positive");
  }
}

SynthDataset synth_generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::vector<Family> families = class_families(config, rng);
  const auto patterns = class_patterns(config, config.map_depth, rng);

  SynthDataset out;
  out.num_classes = config.num_classes;
  for (Split split : {Split::kTrain, Split::kTest}) {
    const std::size_t per_class = split == Split::kTrain
                                      ? config.train_per_class
                                      : config.test_per_class;
    for (std::size_t c = 0; c < families.size(); ++c) {
      for (std::size_t i = 0; i < per_class; ++i) {
        out.videos.push_back(
            make_video(config, families[c], patterns[c], split, c, i));
      }
    }
  }
  return out;
}

std::filesystem::path write_synth_dataset(const SynthDataset& dataset,
                                          const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "poses");
  fs::create_directories(dir / "featmaps");

  Manifest manifest;
  manifest.num_classes = dataset.num_classes;
  for (Split split : {Split::kTrain, Split::kTest}) {
    const std::string pose_rel = "poses/" + split_name(split) + ".jsonl";
    std::vector<PoseSequence> records;
    for (const SynthVideo& v : dataset.videos) {
      if (v.split != split) continue;
      records.push_back(v.poses);
      ManifestEntry e;
      e.video_id = v.poses.video_id;
      e.split = split;
      e.pose_path = pose_rel;
      e.featmap_path = "featmaps/" + v.poses.video_id + ".fmap";
      objectstream::write_feature_map(v.feature_map, dir / e.featmap_path);
      if (v.raster) {
        fs::create_directories(dir / "rasters");
        e.raster_path = "rasters/" + v.poses.video_id + ".fmap";
        objectstream::write_feature_map(*v.raster, dir / e.raster_path);
      }
      manifest.entries.push_back(std::move(e));
    }
    write_pose_file(dir / pose_rel, records);
  }
  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

Dataset to_dataset(const SynthDataset& dataset) {
  Dataset out;
  out.num_classes = dataset.num_classes;
  for (const SynthVideo& v : dataset.videos) {
    Video video;
    video.poses = v.poses;
    video.split = v.split;
    video.feature_map = v.feature_map;
    video.raster = v.raster;
    out.videos.push_back(std::move(video));
  }
  return out;
}

}  // namespace psrn::posedata
