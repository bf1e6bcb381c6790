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

#ifndef PSRN_CLI_COMMANDS_HPP_
#define PSRN_CLI_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psrn/cli/config.hpp"
#include "psrn/cli/gradcheck_suite.hpp"
#include "psrn/training/ablation.hpp"
#include "psrn/training/evaluate.hpp"
#include "psrn/training/trainer.hpp"

namespace psrn::cli {

// Exit statuses of the `psrn` executable.
enum ExitCode : int {
  kExitOk = 0,
  kExitGradcheckFailed = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitData = 4,
  kExitDependency = 5,
  kExitNumeric = 6,
  kExitIo = 7,
  kExitInternal = 8,
};

// Output names inside the output directory.
std::filesystem::path checkpoint_path(const RunConfig& config, int stage);
std::filesystem::path stage_trace_path(const RunConfig& config, int stage);
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kGradcheckFile = "gradcheck.json";
inline constexpr const char* kAblationCsv = "ablation.csv";
inline constexpr const char* kAblationJson = "ablation.json";
inline constexpr const char* kAttentionFile = "attention.csv";
std::string eval_file_name(const std::string& split);

// Writes the dataset (seeded by seeds.data) under <out>/data, or under the
// manifest's directory when `data` is set; returns the manifest path.
std::filesystem::path cmd_synth(const RunConfig& config, std::ostream& log);

// `stage` is "1", "2", "3" or "all". Stage k > 1 starts from `checkpoint`
// when given, else from the stage k-1 checkpoint in the output directory
// (DependencyError when absent). Writes checkpoint_stage<k>.bin and
// trace_stage<k>.csv per stage, and trace.csv as the concatenation of the
// per-stage traces present. Returns the rows of the stages just run.
std::vector<training::TraceRow> cmd_train(
    const RunConfig& config, const std::string& stage,
    const std::optional<std::filesystem::path>& checkpoint, std::ostream& log);

// Without `checkpoint`, the latest stage checkpoint in the output directory.
training::EvalReport cmd_eval(
    const RunConfig& config, const std::string& split,
    const std::optional<std::filesystem::path>& checkpoint, bool pose_only,
    std::ostream& log);

GradSuiteReport cmd_gradcheck(const RunConfig& config, std::ostream& log);

std::vector<training::AblationRow> cmd_ablate(const RunConfig& config,
                                              std::ostream& log);

// Attention weights of every video in `split` (or only `video_id`).
std::filesystem::path cmd_inspect(
    const RunConfig& config, const std::string& split,
    const std::optional<std::filesystem::path>& checkpoint,
    const std::optional<std::string>& video_id, std::ostream& log);

// Parses argv, merges preset < --config file < flags, writes the effective
// config to <out>/config.json and dispatches. Errors are reported on `err`
// and mapped to the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace psrn::cli

#endif  // PSRN_CLI_COMMANDS_HPP_
