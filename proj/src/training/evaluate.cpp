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

#include "psrn/training/evaluate.hpp"

#include <algorithm>
#include <random>

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/ops.hpp"

namespace psrn::training {

std::optional<double> EvalReport::attention_hit_rate() const {
  if (attention_videos == 0) return std::nullopt;
  return static_cast<double>(attention_hits) /
         static_cast<double>(attention_videos);
}

std::uint64_t video_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  return rng();
}

double confusion_accuracy(const std::vector<std::vector<std::size_t>>& m) {
  std::size_t total = 0, hits = 0;
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      total += m[r][c];
      if (r == c) hits += m[r][c];
    }
  }
  if (total == 0) throw DataError("accuracy of an empty confusion matrix");
  return static_cast<double>(hits) / static_cast<double>(total);
}

namespace {

std::vector<double> row_means(const std::vector<std::vector<double>>& alpha) {
  std::vector<double> mean(alpha.front().size(), 0.0);
  for (const auto& row : alpha) {
    for (std::size_t i = 0; i < row.size(); ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(alpha.size());
  return mean;
}

}  // namespace

std::vector<double> mean_attention(const PreparedVideo& video,
                                   ParameterSet& params,
                                   const ModelConfig& config,
                                   std::uint64_t seed) {
  const Sample sample = draw_sample(video, config.frames, seed);
  Tape tape;
  const ModelForward fwd = model_forward(tape, params, config, sample, false);
  return row_means(posestream::attention_matrix(tape, fwd.streams.alpha));
}

EvalReport evaluate(std::span<const PreparedVideo> videos,
                    ParameterSet& params, const ModelConfig& config,
                    const std::string& split_name, const EvalOptions& options) {
  if (videos.empty()) throw DataError("split '" + split_name + "' is empty");
  const std::size_t c = config.num_classes;
  EvalReport report;
  report.split = split_name;
  report.num_classes = c;
  report.videos = videos.size();
  report.relation_evaluated = options.with_relation;
  report.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t hit_pos = 0, hit_vel = 0, hit_fusion = 0, hit_rel = 0;

  for (std::size_t v = 0; v < videos.size(); ++v) {
    const PreparedVideo& video = videos[v];
    if (!video.label || *video.label < 0 ||
        static_cast<std::size_t>(*video.label) >= c) {
      throw DataError("video '" + video.video_id +
                      "' has a missing or out-of-range label");
    }
    const std::size_t label = static_cast<std::size_t>(*video.label);
    const Sample sample =
        draw_sample(video, config.frames, video_seed(options.seed, v));
    Tape tape;
    const ModelForward fwd =
        model_forward(tape, params, config, sample, options.with_relation);

    const auto pos = numcore::softmax_values(
        tape.value(fwd.position_logits).values());
    const auto vel = numcore::softmax_values(
        tape.value(fwd.velocity_logits).values());
    std::vector<double> fused(c);
    for (std::size_t k = 0; k < c; ++k) fused[k] = 0.5 * (pos[k] + vel[k]);
    const std::size_t p_pos = numcore::argmax(pos);
    const std::size_t p_vel = numcore::argmax(vel);
    const std::size_t p_fusion = numcore::argmax(fused);
    std::size_t final_pred = p_fusion;
    if (fwd.relation) {
      final_pred = numcore::argmax(tape.value(fwd.relation->logits).values());
      hit_rel += final_pred == label;
    }
    hit_pos += p_pos == label;
    hit_vel += p_vel == label;
    hit_fusion += p_fusion == label;
    ++report.confusion[label][final_pred];
    if (final_pred != label) report.misclassified.push_back(video.video_id);

    if (video.signal_person && sample.frames.front().size() > 1) {
      const auto mean =
          row_means(posestream::attention_matrix(tape, fwd.streams.alpha));
      const std::size_t s = static_cast<std::size_t>(*video.signal_person);
      bool wins = s < mean.size();
      for (std::size_t i = 0; wins && i < mean.size(); ++i) {
        if (i != s && mean[i] >= mean[s]) wins = false;
      }
      ++report.attention_videos;
      report.attention_hits += wins;
    }
  }
  const double n = static_cast<double>(videos.size());
  report.accuracy.position = hit_pos / n;
  report.accuracy.velocity = hit_vel / n;
  report.accuracy.pose_fusion = hit_fusion / n;
  report.accuracy.relation =
      options.with_relation ? hit_rel / n : report.accuracy.pose_fusion;
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["split"] = report.split;
  j["num_classes"] = report.num_classes;
  j["videos"] = report.videos;
  j["accuracy"] = {{"position", report.accuracy.position},
                   {"velocity", report.accuracy.velocity},
                   {"pose_fusion", report.accuracy.pose_fusion},
                   {"two_stream", report.relation_evaluated
                                      ? nlohmann::json(report.accuracy.relation)
                                      : nlohmann::json(nullptr)}};
  j["confusion"] = report.confusion;
  j["misclassified"] = report.misclassified;
  if (const auto rate = report.attention_hit_rate()) {
    j["attention"] = {{"videos", report.attention_videos},
                      {"signal_person_highest", report.attention_hits},
                      {"rate", *rate}};
  }
  return j;
}

}  // namespace psrn::training
