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

#include "psrn/numcore/checkpoint.hpp"

#include <map>

#include "psrn/numcore/binary_io.hpp"
#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

std::string encode_checkpoint(const ParameterSet& params) {
  ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic)));
  w.u32(kCheckpointVersion);
  for (const auto& [name, param] : params.entries()) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    const Shape& shape = param.tensor.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t extent : shape) w.u32(static_cast<std::uint32_t>(extent));
    for (double v : param.tensor.values()) w.f64(v);
  }
  return w.str();
}

NamedTensors decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.bytes(sizeof(kCheckpointMagic), "checkpoint magic") !=
      std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw FormatError("bad checkpoint magic at byte offset 0");
  }
  const std::size_t version_offset = r.offset();
  const std::uint32_t version = r.u32("checkpoint version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version) + " at byte offset " +
                      std::to_string(version_offset));
  }
  NamedTensors out;
  while (!r.at_end()) {
    const std::uint32_t name_len = r.u32("tensor name length");
    std::string name(r.bytes(name_len, "tensor name"));
    const std::uint32_t rank = r.u32("tensor rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::size_t at = r.offset();
      const std::uint32_t extent = r.u32("tensor extent");
      if (extent == 0) {
        throw FormatError("zero extent for '" + name + "' at byte offset " +
                          std::to_string(at));
      }
      shape.push_back(extent);
    }
    const std::size_t count = shape_size(shape);
    if (r.remaining() / 8 < count) {
      throw FormatError("truncated values for '" + name +
                        "' at byte offset " + std::to_string(r.offset()));
    }
    std::vector<double> values(count);
    for (double& v : values) v = r.f64("tensor value");
    out.emplace_back(std::move(name),
                     TensorBuffer(std::move(shape), std::move(values)));
  }
  return out;
}

void save_checkpoint(const ParameterSet& params,
                     const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(params));
}

NamedTensors read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

void restore_tensors(ParameterSet& params, const NamedTensors& tensors) {
  std::map<std::string, const TensorBuffer*> by_name;
  for (const auto& [name, tensor] : tensors) by_name[name] = &tensor;

  std::string problems;
  auto note = [&problems](const std::string& line) {
    problems += "\n  " + line;
  };
  for (const auto& [name, param] : params.entries()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      note(name + ": missing from checkpoint");
    } else if (it->second->shape() != param.tensor.shape()) {
      note(name + ": checkpoint " + shape_string(it->second->shape()) +
           " vs model " + shape_string(param.tensor.shape()));
    }
  }
  for (const auto& [name, tensor] : by_name) {
    if (!params.contains(name)) note(name + ": not part of the model");
  }
  if (!problems.empty()) {
    throw ConfigError("checkpoint does not match the model configuration:" +
                      problems);
  }
  for (auto& [name, param] : params.entries()) {
    const TensorBuffer& src = *by_name.at(name);
    std::copy(src.values().begin(), src.values().end(),
              param.tensor.values().begin());
  }
}

void restore_checkpoint(ParameterSet& params,
                        const std::filesystem::path& path) {
  restore_tensors(params, read_checkpoint(path));
}

}  // namespace psrn::numcore
