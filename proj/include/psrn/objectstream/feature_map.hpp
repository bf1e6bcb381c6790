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

#ifndef PSRN_OBJECTSTREAM_FEATURE_MAP_HPP_
#define PSRN_OBJECTSTREAM_FEATURE_MAP_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psrn/numcore/tensor.hpp"

namespace psrn::objectstream {

// H x W x D grid of activations, stored h-major, then w, then channel. The
// values are single precision because that is what the file carries, which
// makes write/read round trips exact.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t depth = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, std::size_t d);

  std::size_t index(std::size_t h, std::size_t w, std::size_t c) const {
    return (h * width + w) * depth + c;
  }
  float& at(std::size_t h, std::size_t w, std::size_t c) {
    return values[index(h, w, c)];
  }
  float at(std::size_t h, std::size_t w, std::size_t c) const {
    return values[index(h, w, c)];
  }

  // Throws FormatError on zero extents, a size mismatch or non-finite values.
  void validate() const;
  numcore::TensorBuffer to_tensor() const;
};

inline constexpr char kFeatureMapMagic[8] = {'P', 'S', 'R', 'N',
                                             'F', 'M', 'A', 'P'};
inline constexpr std::uint32_t kFeatureMapVersion = 1;

std::string encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(const std::string& bytes);

void write_feature_map(const FeatureMap& map,
                       const std::filesystem::path& path);
FeatureMap load_feature_map(const std::filesystem::path& path);

// The D-dim channel fibers of a grid, enumerated row-major over (h, w):
// object i = (h, w) with i = h * W + w. Stored as an [H*W x D] matrix.
struct ObjectSet {
  numcore::TensorBuffer objects;

  std::size_t count() const { return objects.dim(0); }
  std::size_t depth() const { return objects.dim(1); }
};

ObjectSet extract_objects(const FeatureMap& map);

}  // namespace psrn::objectstream

#endif  // PSRN_OBJECTSTREAM_FEATURE_MAP_HPP_
