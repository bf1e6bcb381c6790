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

#include "psrn/numcore/mlp.hpp"

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

std::string layer_weight_name(const std::string& prefix, std::size_t layer) {
  return prefix + "/fc" + std::to_string(layer + 1) + "/w";
}

std::string layer_bias_name(const std::string& prefix, std::size_t layer) {
  return prefix + "/fc" + std::to_string(layer + 1) + "/b";
}

void init_mlp(ParameterSet& params, const MlpSpec& spec,
              std::mt19937_64& rng) {
  if (spec.widths.empty() || spec.input_dim == 0) {
    throw ConfigError("mlp '" + spec.prefix + "' needs an input dim and widths");
  }
  std::size_t fan_in = spec.input_dim;
  for (std::size_t layer = 0; layer < spec.widths.size(); ++layer) {
    const std::size_t fan_out = spec.widths[layer];
    params.add(layer_weight_name(spec.prefix, layer),
               glorot_uniform({fan_out, fan_in}, fan_in, fan_out, rng));
    params.add(layer_bias_name(spec.prefix, layer), TensorBuffer({fan_out}));
    fan_in = fan_out;
  }
}

Var mlp_forward(Tape& tape, ParameterSet& params, const MlpSpec& spec,
                Var input) {
  if (spec.widths.empty()) {
    throw ConfigError("mlp '" + spec.prefix + "' has no layers");
  }
  Var h = input;
  std::size_t fan_in = tape.value(input).shape().back();
  for (std::size_t layer = 0; layer < spec.widths.size(); ++layer) {
    const std::string wname = layer_weight_name(spec.prefix, layer);
    const std::string bname = layer_bias_name(spec.prefix, layer);
    if (!params.contains(wname) || !params.contains(bname)) {
      throw ConfigError("mlp '" + spec.prefix + "' is missing layer " +
                        std::to_string(layer + 1) + " parameters");
    }
    const Shape expected_w{spec.widths[layer], fan_in};
    if (params.at(wname).shape() != expected_w ||
        params.at(bname).shape() != Shape{spec.widths[layer]}) {
      throw ConfigError("mlp '" + spec.prefix + "' layer " +
                        std::to_string(layer + 1) + " expects weights " +
                        shape_string(expected_w) + ", found " +
                        shape_string(params.at(wname).shape()));
    }
    h = affine(h, tape.parameter(params, wname), tape.parameter(params, bname));
    const bool last = layer + 1 == spec.widths.size();
    if (!last || spec.activate_last) h = activate(h, spec.activation);
    fan_in = spec.widths[layer];
  }
  return h;
}

}  // namespace psrn::numcore
