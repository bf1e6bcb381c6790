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

#include "psrn/relnet/relation.hpp"

#include <array>
#include <vector>

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/ops.hpp"

namespace psrn::relnet {

numcore::MlpSpec g_spec(const RelationConfig& config, std::size_t input_dim) {
  numcore::MlpSpec spec;
  spec.prefix = kRelationPrefix + "g";
  spec.input_dim = input_dim;
  spec.widths.assign(config.g_layers, config.width);
  return spec;
}

numcore::MlpSpec f_spec(const RelationConfig& config) {
  numcore::MlpSpec spec;
  spec.prefix = kRelationPrefix + "f";
  spec.input_dim = config.width;
  spec.widths.assign(config.f_layers, config.width);
  return spec;
}

numcore::MlpSpec classifier_spec(const RelationConfig& config,
                                 std::size_t num_classes) {
  numcore::MlpSpec spec;
  spec.prefix = kRelationPrefix + "cls";
  spec.input_dim = config.width;
  spec.widths = {num_classes};
  spec.activate_last = false;
  return spec;
}

void init_relation(ParameterSet& params, const RelationConfig& config,
                   std::size_t pose_dim, std::size_t object_dim,
                   std::size_t num_classes, std::mt19937_64& rng) {
  if (config.width == 0 || config.g_layers == 0 || config.f_layers == 0) {
    throw ConfigError("relation widths and depths must be positive");
  }
  numcore::init_mlp(params, g_spec(config, pose_dim + object_dim), rng);
  numcore::init_mlp(params, f_spec(config), rng);
  numcore::init_mlp(params, classifier_spec(config, num_classes), rng);
}

RelationOutputs relation_forward(Tape& tape, ParameterSet& params,
                                 const RelationConfig& config, Var h_position,
                                 Var h_velocity, Var objects,
                                 std::size_t num_classes) {
  const numcore::Shape& shape = tape.shape(objects);
  if (shape.size() != 2) {
    throw DimensionError("relation objects must be an [O x D] matrix, got " +
                         numcore::shape_string(shape));
  }
  if (shape[0] == 0) throw DataError("relation over an empty object set");
  const std::array<Var, 2> pose_parts = {h_position, h_velocity};
  const Var pose = numcore::concat(pose_parts);
  const std::array<Var, 2> pairs = {numcore::tile_rows(pose, shape[0]),
                                    objects};
  const Var joined = numcore::concat(pairs);
  const std::size_t input_dim = tape.shape(joined)[1];
  const Var per_object =
      numcore::mlp_forward(tape, params, g_spec(config, input_dim), joined);
  RelationOutputs out;
  out.pooled = numcore::sum_rows(per_object);
  out.relation = numcore::mlp_forward(tape, params, f_spec(config), out.pooled);
  out.logits = numcore::mlp_forward(
      tape, params, classifier_spec(config, num_classes), out.relation);
  return out;
}

}  // namespace psrn::relnet
