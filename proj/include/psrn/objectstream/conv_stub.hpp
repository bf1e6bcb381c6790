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

#ifndef PSRN_OBJECTSTREAM_CONV_STUB_HPP_
#define PSRN_OBJECTSTREAM_CONV_STUB_HPP_

#include <cstddef>
#include <random>
#include <string>

#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tape.hpp"

namespace psrn::objectstream {

// Small trainable front end that turns an image raster into an H x W x D
// grid: conv3x3 -> relu -> maxpool(2) -> conv3x3 -> relu -> maxpool(s), with
// the second window s chosen so the output lands exactly on the configured
// grid. Parameters live under "object/conv1/..." and "object/conv2/...".
struct ConvStubConfig {
  std::size_t in_channels = 3;
  std::size_t hidden_channels = 8;
  std::size_t kernel = 3;
  std::size_t out_height = 4;
  std::size_t out_width = 4;
  std::size_t out_depth = 32;
};

inline const std::string kConvStubPrefix = "object/conv";

void init_conv_stub(numcore::ParameterSet& params, const ConvStubConfig& config,
                    std::mt19937_64& rng);

// Raster is [rows x cols x in_channels]. rows must be divisible by
// 2 * out_height and cols by 2 * out_width (ConfigError otherwise).
numcore::Var tiny_conv_forward(numcore::Tape& tape,
                               numcore::ParameterSet& params,
                               const ConvStubConfig& config,
                               numcore::Var raster);

// Flattens an [H x W x D] grid into the [H*W x D] object matrix (row-major).
numcore::Var grid_objects(numcore::Var grid);

}  // namespace psrn::objectstream

#endif  // PSRN_OBJECTSTREAM_CONV_STUB_HPP_
