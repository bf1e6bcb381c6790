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

#ifndef PSRN_CLI_CONFIG_HPP_
#define PSRN_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psrn/posedata/synth.hpp"
#include "psrn/training/model.hpp"
#include "psrn/training/trainer.hpp"

namespace psrn::cli {

// Everything a run depends on. Persisted as JSON next to the outputs; the
// file written by a command is the effective, fully merged configuration.
struct RunConfig {
  std::string preset = "desk";
  // Dataset manifest; empty means <out>/data/manifest.json.
  std::string data;
  std::string out = "out";
  // Generator settings for `synth` (its seed comes from seeds.data).
  posedata::SynthConfig synth;
  training::ModelConfig model;
  training::StagePlan plan;
  double weight_decay = training::kDefaultWeightDecay;
  // Named seeds: data (generator), init (weights), sampling (training
  // batches and frames), eval (evaluation frame sampling).
  training::RunSeeds seeds;
  // Base seeds of the ablation runs.
  std::vector<std::uint64_t> ablation_seeds = {1, 2, 3};

  // "desk": toy-scale widths and budgets; "full": full widths and budgets.
  static RunConfig preset_config(const std::string& name);

  std::filesystem::path manifest_path() const;
  std::filesystem::path out_dir() const { return out; }
};

nlohmann::json to_json(const RunConfig& config);

// Overlays the keys present in `json` onto `config`. Unknown keys and
// ill-typed values throw ConfigError naming the key path.
void merge_json(RunConfig& config, const nlohmann::json& json);

// The preset (`preset` when given, else the file's "preset", else "desk")
// overlaid with the file's keys.
RunConfig load_config(const std::filesystem::path& path,
                      const std::optional<std::string>& preset = std::nullopt);

void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace psrn::cli

#endif  // PSRN_CLI_CONFIG_HPP_
