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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "psrn/cli/commands.hpp"
#include "psrn/cli/config.hpp"
#include "psrn/numcore/error.hpp"

namespace psrn {
namespace {

namespace fs = std::filesystem;
using namespace cli;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("psrn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
  }
  return out;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "psrn");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// A small but complete configuration file shared by the tests.
fs::path small_config(const fs::path& dir) {
  const fs::path path = dir / "small.json";
  std::ofstream(path) << R"({
    "synth": {"train_per_class": 4, "test_per_class": 2},
    "model": {"part_hidden": 4, "hidden": 6, "attention": 4,
              "relation_width": 8},
    "plan": [{"iterations": 12, "batch_size": 2},
             {"iterations": 6, "batch_size": 2},
             {"iterations": 6, "batch_size": 2}]
  })";
  return path;
}

std::vector<std::string> with(const fs::path& dir, std::vector<std::string> a) {
  a.push_back("--config");
  a.push_back(small_config(dir).string());
  a.push_back("--out");
  a.push_back((dir / "out").string());
  return a;
}

TEST(CliConfigTest, JsonRoundTripIsIdentity) {
  for (const char* preset : {"desk", "full"}) {
    const RunConfig a = RunConfig::preset_config(preset);
    RunConfig b = RunConfig::preset_config(preset == std::string("desk")
                                               ? "full"
                                               : "desk");
    merge_json(b, to_json(a));
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << preset;
  }
}

TEST(CliConfigTest, UnknownAndIllTypedKeysAreRejected) {
  RunConfig c = RunConfig::preset_config("desk");
  EXPECT_THROW(merge_json(c, nlohmann::json::parse(R"({"modle": {}})")),
               ConfigError);
  EXPECT_THROW(
      merge_json(c, nlohmann::json::parse(R"({"model": {"hidden": -3}})")),
      ConfigError);
  EXPECT_THROW(
      merge_json(c, nlohmann::json::parse(R"({"plan": [{"iterations": "x"}]})")),
      ConfigError);
  EXPECT_THROW(RunConfig::preset_config("laptop"), ConfigError);
}

TEST(CliConfigTest, FlagsOverrideFileAndEffectiveConfigIsWritten) {
  const fs::path dir = fresh_dir("flags");
  const CliRun r = cli(with(dir, {"synth", "--seed", "9", "--ambiguous-pairs",
                               "1"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const RunConfig written = load_config(dir / "out" / kConfigFile);
  EXPECT_EQ(written.synth.train_per_class, 4u);
  EXPECT_EQ(written.synth.ambiguous_pairs, 1u);
  EXPECT_EQ(written.seeds.data, training::RunSeeds::derive(9).data);
  EXPECT_EQ(written.model.pose.hidden, 6u);
}

TEST(CliSynthTest, DefaultConfigListsTwoHundredTrainEntries) {
  const fs::path dir = fresh_dir("synth_default");
  const CliRun r = cli({"synth", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto manifest =
      nlohmann::json::parse(slurp(dir / "data" / "manifest.json"));
  std::size_t train = 0, test = 0;
  for (const auto& e : manifest["entries"]) {
    (e["split"] == "train" ? train : test) += 1;
  }
  EXPECT_EQ(train, 200u);
  EXPECT_EQ(test, 80u);
}

TEST(CliSynthTest, SameSeedGivesIdenticalTrees) {
  const fs::path a = fresh_dir("synth_a");
  const fs::path b = fresh_dir("synth_b");
  ASSERT_EQ(cli(with(a, {"synth", "--seed", "4"})).code, kExitOk);
  ASSERT_EQ(cli(with(b, {"synth", "--seed", "4"})).code, kExitOk);
  const auto ta = tree(a / "out" / "data");
  EXPECT_GT(ta.size(), 3u);
  EXPECT_EQ(ta, tree(b / "out" / "data"));
}

TEST(CliTrainTest, StageTwoWithoutStageOneIsDependencyError) {
  const fs::path dir = fresh_dir("dep");
  ASSERT_EQ(cli(with(dir, {"synth"})).code, kExitOk);
  const CliRun r = cli(with(dir, {"train", "--stage", "2"}));
  EXPECT_EQ(r.code, kExitDependency);
  EXPECT_NE(r.err.find("stage 2 needs the stage 1 checkpoint"),
            std::string::npos)
      << r.err;
  EXPECT_EQ(cli(with(dir, {"eval"})).code, kExitDependency);
}

TEST(CliTrainTest, AllStagesMatchStagedRunsAndRerunsAreIdentical) {
  const fs::path dir = fresh_dir("train");
  ASSERT_EQ(cli(with(dir, {"synth"})).code, kExitOk);
  const fs::path out = dir / "out";
  ASSERT_EQ(cli(with(dir, {"train", "--stage", "all"})).code, kExitOk);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_TRUE(fs::exists(out / ("checkpoint_stage" + std::to_string(k) +
                                  ".bin")));
  }
  const std::string trace = slurp(out / kTraceFile);
  const std::string ckpt = slurp(out / "checkpoint_stage3.bin");
  EXPECT_EQ(trace.rfind("step,stage,lr,L_pos,L_vel,L_rel,reg,total\n", 0), 0u);
  std::size_t lines = 0;
  for (char ch : trace) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 12u + 6u + 6u);

  ASSERT_EQ(cli(with(dir, {"train", "--stage", "all"})).code, kExitOk);
  EXPECT_EQ(slurp(out / kTraceFile), trace);
  EXPECT_EQ(slurp(out / "checkpoint_stage3.bin"), ckpt);

  for (const char* k : {"1", "2", "3"}) {
    ASSERT_EQ(cli(with(dir, {"train", "--stage", k})).code, kExitOk);
  }
  EXPECT_EQ(slurp(out / kTraceFile), trace);
  EXPECT_EQ(slurp(out / "checkpoint_stage3.bin"), ckpt);
}

TEST(CliEvalTest, EvalAndInspectWriteReports) {
  const fs::path dir = fresh_dir("eval");
  ASSERT_EQ(cli(with(dir, {"synth"})).code, kExitOk);
  ASSERT_EQ(cli(with(dir, {"train", "--stage", "1"})).code, kExitOk);
  const fs::path out = dir / "out";
  CliRun r = cli(with(dir, {"eval", "--split", "train", "--pose-only"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto report = nlohmann::json::parse(slurp(out / "eval_train.json"));
  EXPECT_TRUE(report["accuracy"]["two_stream"].is_null());
  EXPECT_EQ(report["confusion"].size(), 4u);

  r = cli(with(dir, {"eval", "--split", "test"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string first = slurp(out / "eval_test.json");
  ASSERT_EQ(cli(with(dir, {"eval", "--split", "test"})).code, kExitOk);
  EXPECT_EQ(slurp(out / "eval_test.json"), first);

  r = cli(with(dir, {"inspect", "--video", "test_c1_0"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(out / kAttentionFile);
  EXPECT_EQ(csv.rfind("video_id,t,person_index,alpha\n", 0), 0u);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 10u * 2u);
  EXPECT_EQ(cli(with(dir, {"inspect", "--video", "nope"})).code, kExitData);
}

TEST(CliEvalTest, ShapeMismatchListsTensors) {
  const fs::path dir = fresh_dir("mismatch");
  ASSERT_EQ(cli(with(dir, {"synth"})).code, kExitOk);
  ASSERT_EQ(cli(with(dir, {"train", "--stage", "1"})).code, kExitOk);
  const CliRun r = cli({"eval", "--preset", "desk", "--out",
                     (dir / "out").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("pose/pos_lstm/fw/w"), std::string::npos) << r.err;
}

TEST(CliGradcheckTest, FreshModelPasses) {
  const fs::path dir = fresh_dir("gradcheck");
  const CliRun r = cli({"gradcheck", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / kGradcheckFile));
  EXPECT_EQ(j["verdict"], "PASS");
  std::vector<std::string> modules;
  for (const auto& m : j["modules"]) {
    modules.push_back(m["module"]);
    EXPECT_LT(m["max_rel_error"].get<double>(), 1e-4) << m["module"];
  }
  EXPECT_EQ(modules, (std::vector<std::string>{
                         "part_encoders", "attention", "lstm_cell", "lookback",
                         "conv_stub", "relation_g_f", "loss_position",
                         "loss_velocity", "loss_relation", "end_to_end"}));
}

TEST(CliUsageTest, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--stage", "4"}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(CliUsageTest, MissingConfigFileIsIoError) {
  const fs::path dir = fresh_dir("missing");
  EXPECT_EQ(cli({"synth", "--config", (dir / "nope.json").string()}).code,
            kExitIo);
}

}  // namespace
}  // namespace psrn
