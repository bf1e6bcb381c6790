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

#include "psrn/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "psrn/numcore/checkpoint.hpp"
#include "psrn/numcore/error.hpp"
#include "psrn/posedata/io.hpp"
#include "psrn/posedata/synth.hpp"

namespace psrn::cli {

namespace fs = std::filesystem;

fs::path checkpoint_path(const RunConfig& config, int stage) {
  return config.out_dir() /
         ("checkpoint_stage" + std::to_string(stage) + ".bin");
}

fs::path stage_trace_path(const RunConfig& config, int stage) {
  return config.out_dir() / ("trace_stage" + std::to_string(stage) + ".csv");
}

std::string eval_file_name(const std::string& split) {
  return "eval_" + split + ".json";
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

posedata::Split parse_split(const std::string& name) {
  if (name == "train") return posedata::Split::kTrain;
  if (name == "test") return posedata::Split::kTest;
  throw ConfigError("unknown split '" + name + "' (expected train or test)");
}

// Loaded dataset plus the model configuration resolved against it.
struct Loaded {
  posedata::Dataset dataset;
  training::ModelConfig model;
};

Loaded load(const RunConfig& config) {
  Loaded l;
  l.dataset = posedata::load_dataset(config.manifest_path());
  l.model = config.model;
  if (static_cast<std::size_t>(l.dataset.num_classes) != l.model.num_classes) {
    throw ConfigError("dataset has " + std::to_string(l.dataset.num_classes) +
                      " classes but the model expects " +
                      std::to_string(l.model.num_classes));
  }
  l.model.persons = training::resolve_persons(l.model, l.dataset);
  return l;
}

numcore::ParameterSet fresh_model(const RunConfig& config,
                                  const training::ModelConfig& model) {
  numcore::ParameterSet params;
  std::mt19937_64 rng(config.seeds.init);
  training::init_model(params, model, rng);
  return params;
}

fs::path latest_checkpoint(const RunConfig& config) {
  for (int stage = 3; stage >= 1; --stage) {
    const fs::path p = checkpoint_path(config, stage);
    if (fs::exists(p)) return p;
  }
  throw DependencyError("no checkpoint_stage<k>.bin in '" +
                        config.out_dir().string() +
                        "'; run `train` first or pass --checkpoint");
}

numcore::ParameterSet load_model(
    const RunConfig& config, const training::ModelConfig& model,
    const std::optional<fs::path>& checkpoint, std::ostream& log) {
  const fs::path path = checkpoint ? *checkpoint : latest_checkpoint(config);
  if (!fs::exists(path)) {
    throw DependencyError("checkpoint '" + path.string() + "' does not exist");
  }
  numcore::ParameterSet params = fresh_model(config, model);
  numcore::restore_checkpoint(params, path);
  log << "loaded " << path.string() << '\n';
  return params;
}

void rebuild_trace(const RunConfig& config) {
  std::ostringstream all;
  training::write_trace_header(all);
  for (int stage = 1; stage <= 3; ++stage) {
    const fs::path p = stage_trace_path(config, stage);
    if (!fs::exists(p)) continue;
    const std::string text = read_text(p);
    all << text.substr(text.find('\n') + 1);
  }
  write_text(config.out_dir() / kTraceFile, all.str());
}

}  // namespace

fs::path cmd_synth(const RunConfig& config, std::ostream& log) {
  posedata::SynthConfig sc = config.synth;
  sc.seed = config.seeds.data;
  const fs::path dir = config.manifest_path().parent_path();
  ensure_dir(dir);
  const posedata::SynthDataset ds = posedata::synth_generate(sc);
  const fs::path manifest = posedata::write_synth_dataset(ds, dir);
  std::size_t train = 0;
  for (const auto& v : ds.videos) train += v.split == posedata::Split::kTrain;
  log << "synth: " << ds.videos.size() << " videos (" << train << " train, "
      << ds.videos.size() - train << " test), " << ds.num_classes
      << " classes -> " << manifest.string() << '\n';
  return manifest;
}

std::vector<training::TraceRow> cmd_train(
    const RunConfig& config, const std::string& stage,
    const std::optional<fs::path>& checkpoint, std::ostream& log) {
  std::vector<int> stages;
  if (stage == "all") {
    for (const auto& s : config.plan.stages) stages.push_back(s.index);
  } else if (stage == "1" || stage == "2" || stage == "3") {
    stages.push_back(std::stoi(stage));
  } else {
    throw ConfigError("unknown stage '" + stage + "' (expected 1, 2, 3 or all)");
  }
  const Loaded data = load(config);
  const auto train = training::prepare_split(
      data.dataset, posedata::Split::kTrain, data.model.persons);
  ensure_dir(config.out_dir());

  numcore::ParameterSet params = fresh_model(config, data.model);
  const int first = stages.front();
  if (first > 1) {
    const fs::path prior =
        checkpoint ? *checkpoint : checkpoint_path(config, first - 1);
    if (!fs::exists(prior)) {
      throw DependencyError("stage " + std::to_string(first) +
                            " needs the stage " + std::to_string(first - 1) +
                            " checkpoint '" + prior.string() + "'");
    }
    numcore::restore_checkpoint(params, prior);
  } else if (checkpoint) {
    numcore::restore_checkpoint(params, *checkpoint);
  }

  std::vector<training::TraceRow> trace;
  for (int k : stages) {
    const training::StageSpec& spec = config.plan.stage(k);
    training::TrainOptions opts;
    opts.weight_decay = config.weight_decay;
    for (const auto& s : config.plan.stages) {
      if (s.index < k) opts.step_offset += s.iterations;
    }
    log << "stage " << k << ": " << spec.iterations << " iterations, batch "
        << spec.batch_size << '\n';
    const auto rows = training::run_stage(
        spec, train, params, data.model,
        training::stage_seed(config.seeds.sampling, k), opts);
    numcore::save_checkpoint(params, checkpoint_path(config, k));
    training::write_trace_csv(stage_trace_path(config, k), rows);
    if (!rows.empty()) {
      log << "stage " << k << " final loss " << rows.back().loss.total << '\n';
    }
    trace.insert(trace.end(), rows.begin(), rows.end());
  }
  rebuild_trace(config);
  return trace;
}

training::EvalReport cmd_eval(const RunConfig& config,
                              const std::string& split,
                              const std::optional<fs::path>& checkpoint,
                              bool pose_only, std::ostream& log) {
  const posedata::Split which = parse_split(split);
  const Loaded data = load(config);
  numcore::ParameterSet params = load_model(config, data.model, checkpoint, log);
  const auto videos =
      training::prepare_split(data.dataset, which, data.model.persons);
  training::EvalOptions opts;
  opts.seed = config.seeds.eval;
  opts.with_relation = !pose_only;
  const training::EvalReport report =
      training::evaluate(videos, params, data.model, split, opts);
  ensure_dir(config.out_dir());
  write_text(config.out_dir() / eval_file_name(split),
             training::report_to_json(report).dump(2) + "\n");
  log << split << ": " << report.videos << " videos, accuracy "
      << report.final_accuracy() << " (position " << report.accuracy.position
      << ", velocity " << report.accuracy.velocity << ", pose fusion "
      << report.accuracy.pose_fusion << ")\n";
  return report;
}

GradSuiteReport cmd_gradcheck(const RunConfig& config, std::ostream& log) {
  const GradSuiteReport report = run_gradcheck_suite(config.seeds.init);
  ensure_dir(config.out_dir());
  write_text(config.out_dir() / kGradcheckFile,
             gradcheck_to_json(report).dump(2) + "\n");
  for (const ModuleCheck& m : report.modules) {
    log << std::left << std::setw(16) << m.module << ' ' << std::scientific
        << std::setprecision(3) << m.max_rel_error << std::defaultfloat
        << "  (" << m.coordinates << " coordinates)\n";
  }
  log << "verdict: " << (report.passed() ? "PASS" : "FAIL") << '\n';
  return report;
}

std::vector<training::AblationRow> cmd_ablate(const RunConfig& config,
                                              std::ostream& log) {
  const Loaded data = load(config);
  training::AblationGrid grid;
  grid.seeds = config.ablation_seeds;
  if (grid.seeds.empty()) throw ConfigError("ablation_seeds is empty");
  const auto rows =
      training::ablation_harness(data.dataset, data.model, config.plan, grid);
  ensure_dir(config.out_dir());
  std::ostringstream csv;
  training::write_ablation_csv(csv, rows);
  write_text(config.out_dir() / kAblationCsv, csv.str());
  write_text(config.out_dir() / kAblationJson,
             training::ablation_to_json(rows).dump(2) + "\n");
  for (const auto& row : rows) {
    log << std::left << std::setw(20) << row.setting.label() << " position "
        << row.mean.position << " velocity " << row.mean.velocity
        << " fusion " << row.mean.pose_fusion << " two-stream "
        << row.mean.relation << '\n';
  }
  return rows;
}

fs::path cmd_inspect(const RunConfig& config, const std::string& split,
                     const std::optional<fs::path>& checkpoint,
                     const std::optional<std::string>& video_id,
                     std::ostream& log) {
  const posedata::Split which = parse_split(split);
  const Loaded data = load(config);
  numcore::ParameterSet params = load_model(config, data.model, checkpoint, log);
  const auto videos =
      training::prepare_split(data.dataset, which, data.model.persons);
  std::ostringstream csv;
  csv << std::setprecision(17);
  bool header = true;
  std::size_t shown = 0, hits = 0, signal = 0;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const training::PreparedVideo& v = videos[i];
    if (video_id && v.video_id != *video_id) continue;
    const training::Sample sample = training::draw_sample(
        v, data.model.frames, training::video_seed(config.seeds.eval, i));
    numcore::Tape tape;
    const training::ModelForward fwd =
        training::model_forward(tape, params, data.model, sample, false);
    const auto alpha = posestream::attention_matrix(tape, fwd.streams.alpha);
    posestream::write_attention_csv(csv, v.video_id, alpha, header);
    header = false;
    ++shown;
    if (v.signal_person) {
      const auto mean =
          training::mean_attention(v, params, data.model,
                                   training::video_seed(config.seeds.eval, i));
      const auto s = static_cast<std::size_t>(*v.signal_person);
      bool top = true;
      for (std::size_t p = 0; p < mean.size(); ++p) {
        if (p != s && mean[p] >= mean[s]) top = false;
      }
      ++signal;
      hits += top;
    }
  }
  if (video_id && shown == 0) {
    throw DataError("no video '" + *video_id + "' in the " + split + " split");
  }
  ensure_dir(config.out_dir());
  const fs::path out = config.out_dir() / kAttentionFile;
  write_text(out, csv.str());
  log << "attention for " << shown << " videos -> " << out.string() << '\n';
  if (signal > 0) {
    log << "signal person has the highest mean attention in " << hits << "/"
        << signal << " videos\n";
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Pose and object-stream relation network for action recognition",
               "psrn"};
  app.require_subcommand(1);
  std::string config_path, out_dir, data_path, preset, checkpoint;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--preset", preset, "desk or full (overrides the file)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--data", data_path, "dataset manifest");
  app.add_option("--seed", seed, "base seed; derives every named seed");
  app.add_option("--checkpoint", checkpoint, "checkpoint to start from / load");

  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
  std::optional<std::size_t> ambiguous;
  bool split_cues = false, rasters = false;
  synth->add_option("--ambiguous-pairs", ambiguous,
                    "class pairs separable only by the feature map");
  synth->add_flag("--split-cues", split_cues,
                  "posture-only and motion-only classes");
  synth->add_flag("--rasters", rasters, "also write image rasters");

  auto* train = app.add_subcommand("train", "run training stages");
  std::string stage = "all";
  train->add_option("--stage", stage, "1, 2, 3 or all")
      ->check(CLI::IsMember({"1", "2", "3", "all"}));

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string split = "test";
  bool pose_only = false;
  eval->add_option("--split", split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  eval->add_flag("--pose-only", pose_only, "skip the relation head");

  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient checks");
  auto* ablate = app.add_subcommand("ablate", "uni/bi x attention grid");

  auto* inspect = app.add_subcommand("inspect", "dump attention weights");
  std::string inspect_split = "test";
  std::optional<std::string> video;
  inspect->add_option("--split", inspect_split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  inspect->add_option("--video", video, "only this video id");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<std::string> preset_flag;
    if (!preset.empty()) preset_flag = preset;
    RunConfig config = config_path.empty()
                           ? RunConfig::preset_config(preset_flag.value_or("desk"))
                           : load_config(config_path, preset_flag);
    if (!out_dir.empty()) config.out = out_dir;
    if (!data_path.empty()) config.data = data_path;
    if (seed) config.seeds = training::RunSeeds::derive(*seed);
    if (ambiguous) config.synth.ambiguous_pairs = *ambiguous;
    if (split_cues) config.synth.split_cues = true;
    if (rasters) config.synth.rasters = true;
    std::optional<fs::path> ckpt;
    if (!checkpoint.empty()) ckpt = checkpoint;

    ensure_dir(config.out_dir());
    save_config(config, config.out_dir() / kConfigFile);

    if (synth->parsed()) {
      cmd_synth(config, out);
    } else if (train->parsed()) {
      cmd_train(config, stage, ckpt, out);
    } else if (eval->parsed()) {
      cmd_eval(config, split, ckpt, pose_only, out);
    } else if (gradcheck->parsed()) {
      if (!cmd_gradcheck(config, out).passed()) return kExitGradcheckFailed;
    } else if (ablate->parsed()) {
      cmd_ablate(config, out);
    } else if (inspect->parsed()) {
      cmd_inspect(config, inspect_split, ckpt, video, out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DependencyError& e) {
    err << "dependency error: " << e.what() << '\n';
    return kExitDependency;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace psrn::cli
