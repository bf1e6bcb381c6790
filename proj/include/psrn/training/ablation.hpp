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

#ifndef PSRN_TRAINING_ABLATION_HPP_
#define PSRN_TRAINING_ABLATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "psrn/posedata/io.hpp"
#include "psrn/training/evaluate.hpp"
#include "psrn/training/trainer.hpp"

namespace psrn::training {

struct AblationSetting {
  posestream::StreamMode mode = posestream::StreamMode::kBidirectional;
  bool attention = true;

  // "uni-LSTM+attention", "bi-LSTM", ...
  std::string label() const;
};

struct AblationGrid {
  std::vector<posestream::StreamMode> modes = {
      posestream::StreamMode::kUnidirectional,
      posestream::StreamMode::kBidirectional};
  std::vector<bool> attention = {false, true};
  // One full train + evaluate per seed and setting; the base seed of a run.
  std::vector<std::uint64_t> seeds = {1};

  std::vector<AblationSetting> settings() const;
};

struct AblationRow {
  AblationSetting setting;
  std::vector<std::uint64_t> seeds;
  std::vector<BranchAccuracy> per_seed;
  BranchAccuracy mean;
};

// Trains every (setting, seed) pair from scratch through `plan` on the
// train split and evaluates on the test split. Rows follow grid order:
// modes outer, attention inner.
std::vector<AblationRow> ablation_harness(const posedata::Dataset& dataset,
                                          const ModelConfig& base,
                                          const StagePlan& plan,
                                          const AblationGrid& grid);

// CSV: setting,mode,attention,seed,position,velocity,pose_fusion,two_stream
// with seed "mean" for the averaged line of each setting.
void write_ablation_csv(std::ostream& out,
                        const std::vector<AblationRow>& rows);
nlohmann::json ablation_to_json(const std::vector<AblationRow>& rows);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_ABLATION_HPP_
