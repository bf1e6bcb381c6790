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

#include "psrn/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "psrn/numcore/error.hpp"

namespace psrn::cli {

using nlohmann::json;

RunConfig RunConfig::preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") {
    c.model = training::ModelConfig::desk();
    c.plan = training::StagePlan::desk();
  } else if (name == "full") {
    c.model = training::ModelConfig::full();
    c.plan = training::StagePlan::full();
    c.synth.num_classes = static_cast<int>(c.model.num_classes);
    c.synth.map_height = c.model.object_height;
    c.synth.map_width = c.model.object_width;
    c.synth.map_depth = c.model.object_depth;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
  }
  c.seeds = training::RunSeeds::derive(1);
  return c;
}

std::filesystem::path RunConfig::manifest_path() const {
  if (!data.empty()) return data;
  return std::filesystem::path(out) / "data" / "manifest.json";
}

namespace {

json losses_json(const training::LossFlags& f) {
  return {{"position", f.position},
          {"velocity", f.velocity},
          {"relation", f.relation}};
}

json schedule_json(const training::LrSchedule& s) {
  return {{"kind", training::schedule_kind_name(s.kind)},
          {"rate", s.rate},
          {"warmup_start", s.warmup_start},
          {"warmup_steps", s.warmup_steps},
          {"halving_step", s.halving_step},
          {"floor", s.floor}};
}

// Reads keys of one JSON object into existing values, remembering which
// keys were consumed so that leftovers can be reported as unknown.
class Overlay {
 public:
  Overlay(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& target) {
    const json* v = take(key);
    if (v == nullptr) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) fail(key, "a boolean");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) fail(key, "a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) fail(key, "an integer");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) fail(key, "a string");
    }
    target = v->get<T>();
  }

  const json* take(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + path(key));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const char* what) const {
    throw ConfigError(path(key) + ": expected " + what);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_child(Overlay& parent, const std::string& key, Fn fn) {
  if (const json* v = parent.take(key)) {
    Overlay child(*v, parent.path(key));
    fn(child);
    child.finish();
  }
}

void merge_synth(Overlay& o, posedata::SynthConfig& s) {
  o.get("num_classes", s.num_classes);
  o.get("persons", s.persons);
  o.get("min_frames", s.min_frames);
  o.get("max_frames", s.max_frames);
  o.get("train_per_class", s.train_per_class);
  o.get("test_per_class", s.test_per_class);
  o.get("map_height", s.map_height);
  o.get("map_width", s.map_width);
  o.get("map_depth", s.map_depth);
  o.get("ambiguous_pairs", s.ambiguous_pairs);
  o.get("split_cues", s.split_cues);
  o.get("rasters", s.rasters);
  o.get("raster_scale", s.raster_scale);
  o.get("image_width", s.image_width);
  o.get("image_height", s.image_height);
  o.get("keypoint_noise", s.keypoint_noise);
  o.get("missing_keypoint_rate", s.missing_keypoint_rate);
  o.get("missing_person_rate", s.missing_person_rate);
  o.get("distractor_scale", s.distractor_scale);
  o.get("map_noise", s.map_noise);
  o.get("pattern_strength", s.pattern_strength);
}

void merge_model(Overlay& o, training::ModelConfig& m) {
  o.get("num_classes", m.num_classes);
  o.get("persons", m.persons);
  o.get("frames", m.frames);
  o.get("part_hidden", m.pose.part_hidden);
  o.get("hidden", m.pose.hidden);
  o.get("attention", m.pose.attention);
  std::string mode = posestream::mode_name(m.pose.mode);
  o.get("mode", mode);
  m.pose.mode = posestream::parse_mode(mode);
  o.get("lookback", m.pose.lookback);
  o.get("use_attention", m.pose.use_attention);
  o.get("relation_width", m.relation.width);
  o.get("g_layers", m.relation.g_layers);
  o.get("f_layers", m.relation.f_layers);
  o.get("object_height", m.object_height);
  o.get("object_width", m.object_width);
  o.get("object_depth", m.object_depth);
  o.get("conv_stub", m.conv_stub);
  o.get("conv_hidden", m.conv_hidden);
}

void merge_stage(Overlay& o, training::StageSpec& s) {
  o.get("stage", s.index);
  with_child(o, "losses", [&](Overlay& l) {
    l.get("position", s.losses.position);
    l.get("velocity", s.losses.velocity);
    l.get("relation", s.losses.relation);
  });
  if (const json* f = o.take("frozen")) {
    if (!f->is_array()) throw ConfigError(o.path("frozen") + ": expected an array");
    s.frozen.clear();
    for (const json& p : *f) {
      if (!p.is_string()) {
        throw ConfigError(o.path("frozen") + ": expected strings");
      }
      s.frozen.push_back(p.get<std::string>());
    }
  }
  with_child(o, "schedule", [&](Overlay& c) {
    std::string kind = training::schedule_kind_name(s.schedule.kind);
    c.get("kind", kind);
    s.schedule.kind = training::parse_schedule_kind(kind);
    c.get("rate", s.schedule.rate);
    c.get("warmup_start", s.schedule.warmup_start);
    c.get("warmup_steps", s.schedule.warmup_steps);
    c.get("halving_step", s.schedule.halving_step);
    c.get("floor", s.schedule.floor);
  });
  o.get("iterations", s.iterations);
  o.get("batch_size", s.batch_size);
}

}  // namespace

json to_json(const RunConfig& c) {
  const auto& s = c.synth;
  const auto& m = c.model;
  json plan = json::array();
  for (const training::StageSpec& st : c.plan.stages) {
    plan.push_back({{"stage", st.index},
                    {"losses", losses_json(st.losses)},
                    {"frozen", st.frozen},
                    {"schedule", schedule_json(st.schedule)},
                    {"iterations", st.iterations},
                    {"batch_size", st.batch_size}});
  }
  return {
      {"preset", c.preset},
      {"data", c.data},
      {"out", c.out},
      {"synth",
       {{"num_classes", s.num_classes},
        {"persons", s.persons},
        {"min_frames", s.min_frames},
        {"max_frames", s.max_frames},
        {"train_per_class", s.train_per_class},
        {"test_per_class", s.test_per_class},
        {"map_height", s.map_height},
        {"map_width", s.map_width},
        {"map_depth", s.map_depth},
        {"ambiguous_pairs", s.ambiguous_pairs},
        {"split_cues", s.split_cues},
        {"rasters", s.rasters},
        {"raster_scale", s.raster_scale},
        {"image_width", s.image_width},
        {"image_height", s.image_height},
        {"keypoint_noise", s.keypoint_noise},
        {"missing_keypoint_rate", s.missing_keypoint_rate},
        {"missing_person_rate", s.missing_person_rate},
        {"distractor_scale", s.distractor_scale},
        {"map_noise", s.map_noise},
        {"pattern_strength", s.pattern_strength}}},
      {"model",
       {{"num_classes", m.num_classes},
        {"persons", m.persons},
        {"frames", m.frames},
        {"part_hidden", m.pose.part_hidden},
        {"hidden", m.pose.hidden},
        {"attention", m.pose.attention},
        {"mode", posestream::mode_name(m.pose.mode)},
        {"lookback", m.pose.lookback},
        {"use_attention", m.pose.use_attention},
        {"relation_width", m.relation.width},
        {"g_layers", m.relation.g_layers},
        {"f_layers", m.relation.f_layers},
        {"object_height", m.object_height},
        {"object_width", m.object_width},
        {"object_depth", m.object_depth},
        {"conv_stub", m.conv_stub},
        {"conv_hidden", m.conv_hidden}}},
      {"plan", std::move(plan)},
      {"weight_decay", c.weight_decay},
      {"seeds",
       {{"data", c.seeds.data},
        {"init", c.seeds.init},
        {"sampling", c.seeds.sampling},
        {"eval", c.seeds.eval}}},
      {"ablation_seeds", c.ablation_seeds}};
}

void merge_json(RunConfig& c, const json& j) {
  Overlay o(j, "config");
  o.get("preset", c.preset);
  o.get("data", c.data);
  o.get("out", c.out);
  with_child(o, "synth", [&](Overlay& s) { merge_synth(s, c.synth); });
  with_child(o, "model", [&](Overlay& m) { merge_model(m, c.model); });
  if (const json* p = o.take("plan")) {
    if (!p->is_array()) throw ConfigError("config.plan: expected an array");
    if (p->size() > c.plan.stages.size()) {
      throw ConfigError("config.plan: more than " +
                        std::to_string(c.plan.stages.size()) + " stages");
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      Overlay st((*p)[i], "config.plan[" + std::to_string(i) + "]");
      merge_stage(st, c.plan.stages[i]);
      st.finish();
    }
  }
  o.get("weight_decay", c.weight_decay);
  with_child(o, "seeds", [&](Overlay& s) {
    s.get("data", c.seeds.data);
    s.get("init", c.seeds.init);
    s.get("sampling", c.seeds.sampling);
    s.get("eval", c.seeds.eval);
  });
  if (const json* a = o.take("ablation_seeds")) {
    if (!a->is_array()) {
      throw ConfigError("config.ablation_seeds: expected an array");
    }
    c.ablation_seeds.clear();
    for (const json& v : *a) {
      if (!v.is_number_unsigned()) {
        throw ConfigError("config.ablation_seeds: expected non-negative integers");
      }
      c.ablation_seeds.push_back(v.get<std::uint64_t>());
    }
  }
  o.finish();
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::optional<std::string>& preset_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " +
                      e.what());
  }
  std::string preset = "desk";
  if (preset_override) {
    preset = *preset_override;
    if (j.is_object()) j.erase("preset");
  } else if (j.is_object() && j.contains("preset")) {
    if (!j["preset"].is_string()) {
      throw ConfigError("config.preset: expected a string");
    }
    preset = j["preset"].get<std::string>();
  }
  RunConfig c = RunConfig::preset_config(preset);
  merge_json(c, j);
  return c;
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write config '" + path.string() + "'");
  out << to_json(config).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace psrn::cli
