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

#include "psrn/objectstream/conv_stub.hpp"

#include "psrn/numcore/error.hpp"
#include "psrn/numcore/ops.hpp"

namespace psrn::objectstream {

using numcore::Shape;
using numcore::TensorBuffer;
using numcore::Var;

void init_conv_stub(numcore::ParameterSet& params, const ConvStubConfig& config,
                    std::mt19937_64& rng) {
  const std::size_t k2 = config.kernel * config.kernel;
  auto add_conv = [&](int index, std::size_t c_in, std::size_t c_out) {
    const std::string base = kConvStubPrefix + std::to_string(index);
    params.add(base + "/w",
               numcore::glorot_uniform(
                   {c_out, config.kernel, config.kernel, c_in}, k2 * c_in,
                   k2 * c_out, rng));
    params.add(base + "/b", TensorBuffer({c_out}));
  };
  add_conv(1, config.in_channels, config.hidden_channels);
  add_conv(2, config.hidden_channels, config.out_depth);
}

Var tiny_conv_forward(numcore::Tape& tape, numcore::ParameterSet& params,
                      const ConvStubConfig& config, Var raster) {
  const Shape& shape = tape.shape(raster);
  if (shape.size() != 3 || shape[2] != config.in_channels) {
    throw ConfigError("conv stub expects a rows x cols x " +
                      std::to_string(config.in_channels) + " raster, got " +
                      numcore::shape_string(shape));
  }
  const std::size_t rows = shape[0], cols = shape[1];
  if (rows % (2 * config.out_height) != 0 ||
      cols % (2 * config.out_width) != 0) {
    throw ConfigError("conv stub raster " + numcore::shape_string(shape) +
                      " is not divisible into a " +
                      std::to_string(config.out_height) + "x" +
                      std::to_string(config.out_width) + " grid at stride 2k");
  }
  const std::size_t window_h = rows / 2 / config.out_height;
  const std::size_t window_w = cols / 2 / config.out_width;
  if (window_h != window_w) {
    throw ConfigError("conv stub needs equal vertical and horizontal stride");
  }
  Var h = numcore::conv2d(raster, tape.parameter(params, kConvStubPrefix + "1/w"),
                          tape.parameter(params, kConvStubPrefix + "1/b"));
  h = numcore::max_pool(numcore::relu(h), 2);
  h = numcore::conv2d(h, tape.parameter(params, kConvStubPrefix + "2/w"),
                      tape.parameter(params, kConvStubPrefix + "2/b"));
  return numcore::max_pool(numcore::relu(h), window_h);
}

Var grid_objects(Var grid) {
  const Shape& shape = grid.tape->shape(grid);
  if (shape.size() != 3) {
    throw DimensionError("grid_objects expects an H x W x D grid, got " +
                         numcore::shape_string(shape));
  }
  return numcore::reshape(grid, {shape[0] * shape[1], shape[2]});
}

}  // namespace psrn::objectstream
