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

#include "psrn/objectstream/feature_map.hpp"

#include <cmath>
#include <limits>

#include "psrn/numcore/binary_io.hpp"
#include "psrn/numcore/error.hpp"

namespace psrn::objectstream {

using numcore::ByteReader;
using numcore::ByteWriter;

FeatureMap::FeatureMap(std::size_t h, std::size_t w, std::size_t d)
    : height(h), width(w), depth(d), values(h * w * d, 0.0f) {}

void FeatureMap::validate() const {
  if (height == 0 || width == 0 || depth == 0) {
    throw FormatError("feature map has a zero extent");
  }
  if (values.size() != height * width * depth) {
    throw FormatError("feature map holds " + std::to_string(values.size()) +
                      " values for a " + std::to_string(height) + "x" +
                      std::to_string(width) + "x" + std::to_string(depth) +
                      " grid");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw FormatError("feature map has non-finite values");
  }
}

numcore::TensorBuffer FeatureMap::to_tensor() const {
  return numcore::TensorBuffer({height, width, depth},
                               std::vector<double>(values.begin(), values.end()));
}

std::string encode_feature_map(const FeatureMap& map) {
  map.validate();
  ByteWriter w;
  w.bytes(std::string_view(kFeatureMapMagic, sizeof(kFeatureMapMagic)));
  w.u32(kFeatureMapVersion);
  w.u32(static_cast<std::uint32_t>(map.height));
  w.u32(static_cast<std::uint32_t>(map.width));
  w.u32(static_cast<std::uint32_t>(map.depth));
  for (float v : map.values) w.f32(v);
  return w.str();
}

FeatureMap decode_feature_map(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.bytes(sizeof(kFeatureMapMagic), "feature map magic") !=
      std::string_view(kFeatureMapMagic, sizeof(kFeatureMapMagic))) {
    throw FormatError("bad feature map magic at byte offset 0");
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("feature map version");
  if (version != kFeatureMapVersion) {
    throw FormatError("unsupported feature map version " +
                      std::to_string(version) + " at byte offset " +
                      std::to_string(version_at));
  }
  const std::size_t dims_at = r.offset();
  FeatureMap map;
  map.height = r.u32("feature map height");
  map.width = r.u32("feature map width");
  map.depth = r.u32("feature map depth");
  if (map.height == 0 || map.width == 0 || map.depth == 0) {
    throw FormatError("feature map header at byte offset " +
                      std::to_string(dims_at) + " declares a zero extent");
  }
  const std::size_t count = map.height * map.width * map.depth;
  if (r.remaining() != count * 4) {
    throw FormatError(
        (r.remaining() < count * 4 ? "truncated feature map payload"
                                   : "trailing bytes after feature map") +
        std::string(" at byte offset ") + std::to_string(r.offset()) +
        ": header declares " + std::to_string(count) + " floats, payload has " +
        std::to_string(r.remaining()) + " bytes");
  }
  map.values.resize(count);
  for (float& v : map.values) v = r.f32("feature map value");
  map.validate();
  return map;
}

void write_feature_map(const FeatureMap& map,
                       const std::filesystem::path& path) {
  numcore::write_file_bytes(path, encode_feature_map(map));
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  try {
    return decode_feature_map(numcore::read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ObjectSet extract_objects(const FeatureMap& map) {
  map.validate();
  numcore::TensorBuffer objects({map.height * map.width, map.depth});
  for (std::size_t h = 0; h < map.height; ++h) {
    for (std::size_t w = 0; w < map.width; ++w) {
      const std::size_t obj = h * map.width + w;
      for (std::size_t c = 0; c < map.depth; ++c) {
        objects.at(obj, c) = map.at(h, w, c);
      }
    }
  }
  return ObjectSet{std::move(objects)};
}

}  // namespace psrn::objectstream
