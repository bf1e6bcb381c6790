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

#ifndef PSRN_NUMCORE_MLP_HPP_
#define PSRN_NUMCORE_MLP_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "psrn/numcore/ops.hpp"
#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tape.hpp"

namespace psrn::numcore {

// A stack of dense layers stored under `prefix` as prefix/fc1/w, prefix/fc1/b,
// prefix/fc2/w, ... Hidden layers always apply `activation`; whether the last
// layer does is controlled by `activate_last`.
struct MlpSpec {
  std::string prefix;
  std::size_t input_dim = 0;
  std::vector<std::size_t> widths;
  Activation activation = Activation::kRelu;
  bool activate_last = true;

  std::size_t output_dim() const { return widths.back(); }
};

std::string layer_weight_name(const std::string& prefix, std::size_t layer);
std::string layer_bias_name(const std::string& prefix, std::size_t layer);

void init_mlp(ParameterSet& params, const MlpSpec& spec, std::mt19937_64& rng);
Var mlp_forward(Tape& tape, ParameterSet& params, const MlpSpec& spec,
                Var input);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_MLP_HPP_
