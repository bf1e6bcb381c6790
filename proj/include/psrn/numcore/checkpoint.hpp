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

#ifndef PSRN_NUMCORE_CHECKPOINT_HPP_
#define PSRN_NUMCORE_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "psrn/numcore/parameters.hpp"

namespace psrn::numcore {

// Layout: "PSRNCKPT", u32 version, then one record per tensor in name order:
// u32 name length, name bytes, u32 rank, u32 extents, little-endian f64 values.
inline constexpr char kCheckpointMagic[8] = {'P', 'S', 'R', 'N',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, TensorBuffer>>;

std::string encode_checkpoint(const ParameterSet& params);
NamedTensors decode_checkpoint(const std::string& bytes);

void save_checkpoint(const ParameterSet& params,
                     const std::filesystem::path& path);
NamedTensors read_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into an existing parameter set. Every tensor must
// match by name and shape in both directions; otherwise a ConfigError lists
// all mismatches and `params` is left untouched.
void restore_checkpoint(ParameterSet& params,
                        const std::filesystem::path& path);
void restore_tensors(ParameterSet& params, const NamedTensors& tensors);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_CHECKPOINT_HPP_
