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

#ifndef PSRN_RELNET_RELATION_HPP_
#define PSRN_RELNET_RELATION_HPP_

#include <cstddef>
#include <random>
#include <string>

#include "psrn/numcore/mlp.hpp"
#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tape.hpp"

namespace psrn::relnet {

using numcore::ParameterSet;
using numcore::Tape;
using numcore::Var;

struct RelationConfig {
  std::size_t width = 512;
  std::size_t g_layers = 4;
  std::size_t f_layers = 2;
};

inline const std::string kRelationPrefix = "relation/";

// g: (h_L, h_V, x_i) -> width, ReLU on every layer.
numcore::MlpSpec g_spec(const RelationConfig& config, std::size_t input_dim);
// f: width -> width, ReLU on every layer.
numcore::MlpSpec f_spec(const RelationConfig& config);
// Final affine map R -> C logits.
numcore::MlpSpec classifier_spec(const RelationConfig& config,
                                 std::size_t num_classes);

// `pose_dim` is |h_L| + |h_V|; `object_dim` is D.
void init_relation(ParameterSet& params, const RelationConfig& config,
                   std::size_t pose_dim, std::size_t object_dim,
                   std::size_t num_classes, std::mt19937_64& rng);

struct RelationOutputs {
  // sum_i g(h_L, h_V, x_i), before f.
  Var pooled;
  Var relation;
  Var logits;
};

// Every object row of `objects` ([O x D], O >= 1) is paired with the same
// pose context; the per-object outputs are summed (not averaged).
RelationOutputs relation_forward(Tape& tape, ParameterSet& params,
                                 const RelationConfig& config, Var h_position,
                                 Var h_velocity, Var objects,
                                 std::size_t num_classes);

}  // namespace psrn::relnet

#endif  // PSRN_RELNET_RELATION_HPP_
