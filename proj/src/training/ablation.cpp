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

#include "psrn/training/ablation.hpp"

#include <iomanip>
#include <ostream>
#include <random>

namespace psrn::training {

std::string AblationSetting::label() const {
  std::string out = mode == posestream::StreamMode::kBidirectional
                        ? "bi-LSTM"
                        : "uni-LSTM";
  if (attention) out += "+attention";
  return out;
}

std::vector<AblationSetting> AblationGrid::settings() const {
  std::vector<AblationSetting> out;
  for (posestream::StreamMode m : modes) {
    for (bool a : attention) out.push_back({m, a});
  }
  return out;
}

std::vector<AblationRow> ablation_harness(const posedata::Dataset& dataset,
                                          const ModelConfig& base,
                                          const StagePlan& plan,
                                          const AblationGrid& grid) {
  ModelConfig config = base;
  config.persons = resolve_persons(base, dataset);
  const auto train =
      prepare_split(dataset, posedata::Split::kTrain, config.persons);
  const auto test =
      prepare_split(dataset, posedata::Split::kTest, config.persons);

  std::vector<AblationRow> rows;
  for (const AblationSetting& setting : grid.settings()) {
    AblationRow row;
    row.setting = setting;
    config.pose.mode = setting.mode;
    config.pose.use_attention = setting.attention;
    for (std::uint64_t seed : grid.seeds) {
      const RunSeeds seeds = RunSeeds::derive(seed);
      ParameterSet params;
      std::mt19937_64 init(seeds.init);
      init_model(params, config, init);
      run_plan(plan, train, params, config, seeds.sampling);
      EvalOptions eval;
      eval.seed = seeds.eval;
      const EvalReport report = evaluate(test, params, config, "test", eval);
      row.seeds.push_back(seed);
      row.per_seed.push_back(report.accuracy);
    }
    const double n = static_cast<double>(row.per_seed.size());
    for (const BranchAccuracy& a : row.per_seed) {
      row.mean.position += a.position / n;
      row.mean.velocity += a.velocity / n;
      row.mean.pose_fusion += a.pose_fusion / n;
      row.mean.relation += a.relation / n;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void write_line(std::ostream& out, const AblationSetting& s,
                const std::string& seed, const BranchAccuracy& a) {
  out << s.label() << ',' << posestream::mode_name(s.mode) << ','
      << (s.attention ? "on" : "off") << ',' << seed << ',' << a.position
      << ',' << a.velocity << ',' << a.pose_fusion << ',' << a.relation
      << '\n';
}

nlohmann::json accuracy_json(const BranchAccuracy& a) {
  return {{"position", a.position},
          {"velocity", a.velocity},
          {"pose_fusion", a.pose_fusion},
          {"two_stream", a.relation}};
}

}  // namespace

void write_ablation_csv(std::ostream& out,
                        const std::vector<AblationRow>& rows) {
  out << std::setprecision(10);
  out << "setting,mode,attention,seed,position,velocity,pose_fusion,"
         "two_stream\n";
  for (const AblationRow& row : rows) {
    for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
      write_line(out, row.setting, std::to_string(row.seeds[i]),
                 row.per_seed[i]);
    }
    write_line(out, row.setting, "mean", row.mean);
  }
}

nlohmann::json ablation_to_json(const std::vector<AblationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const AblationRow& row : rows) {
    nlohmann::json per_seed = nlohmann::json::array();
    for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
      nlohmann::json entry = accuracy_json(row.per_seed[i]);
      entry["seed"] = row.seeds[i];
      per_seed.push_back(std::move(entry));
    }
    out.push_back({{"setting", row.setting.label()},
                   {"mode", posestream::mode_name(row.setting.mode)},
                   {"attention", row.setting.attention},
                   {"mean", accuracy_json(row.mean)},
                   {"runs", std::move(per_seed)}});
  }
  return out;
}

}  // namespace psrn::training
