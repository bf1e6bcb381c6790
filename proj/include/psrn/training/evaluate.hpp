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

#ifndef PSRN_TRAINING_EVALUATE_HPP_
#define PSRN_TRAINING_EVALUATE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "psrn/training/model.hpp"

namespace psrn::training {

struct BranchAccuracy {
  double position = 0.0;
  double velocity = 0.0;
  double pose_fusion = 0.0;
  double relation = 0.0;
};

struct EvalReport {
  std::string split;
  std::size_t num_classes = 0;
  std::size_t videos = 0;
  BranchAccuracy accuracy;
  // False when evaluated without the relation head; the final prediction is
  // then the pose-fusion branch and `accuracy.relation` mirrors it.
  bool relation_evaluated = true;
  // Rows are true classes, columns final predictions.
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::string> misclassified;
  // Videos that record a signal person: how many put more mean attention on
  // it than on every other person.
  std::size_t attention_videos = 0;
  std::size_t attention_hits = 0;

  double final_accuracy() const { return accuracy.relation; }
  std::optional<double> attention_hit_rate() const;
};

struct EvalOptions {
  std::uint64_t seed = 0;
  // Relation head available (feature maps present and model trained for it).
  bool with_relation = true;
};

// Per-video frame sampling is seeded from (seed, video position), so the
// report depends only on (params, videos, seed). Pose fusion averages the
// position and velocity posteriors. Throws DataError on an empty split.
EvalReport evaluate(std::span<const PreparedVideo> videos,
                    ParameterSet& params, const ModelConfig& config,
                    const std::string& split_name,
                    const EvalOptions& options = {});

// Accuracy = trace / total of a confusion matrix.
double confusion_accuracy(const std::vector<std::vector<std::size_t>>& m);

nlohmann::json report_to_json(const EvalReport& report);

// Mean attention weight per person for one video under a fixed sampling.
std::vector<double> mean_attention(const PreparedVideo& video,
                                   ParameterSet& params,
                                   const ModelConfig& config,
                                   std::uint64_t seed);

std::uint64_t video_seed(std::uint64_t seed, std::size_t index);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_EVALUATE_HPP_
