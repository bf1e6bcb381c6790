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

#ifndef PSRN_NUMCORE_PARAMETERS_HPP_
#define PSRN_NUMCORE_PARAMETERS_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "psrn/numcore/tensor.hpp"

namespace psrn::numcore {

struct Parameter {
  TensorBuffer tensor;
  bool frozen = false;
};

// Named trainable tensors. Names are unique and iteration is in name order,
// which fixes the checkpoint layout and every reduction over parameters.
class ParameterSet {
 public:
  using Map = std::map<std::string, Parameter, std::less<>>;

  TensorBuffer& add(const std::string& name, TensorBuffer value);
  bool contains(std::string_view name) const;

  TensorBuffer& at(std::string_view name);
  const TensorBuffer& at(std::string_view name) const;

  void set_frozen(std::string_view name, bool frozen);
  // Applies to every parameter whose name starts with `prefix`; returns the
  // number of parameters touched.
  std::size_t set_group_frozen(std::string_view prefix, bool frozen);
  bool is_frozen(std::string_view name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  const Map& entries() const { return entries_; }
  Map& entries() { return entries_; }

 private:
  Map entries_;
};

bool starts_with(std::string_view text, std::string_view prefix);

// Glorot-uniform weights in +/- sqrt(6 / (fan_in + fan_out)).
TensorBuffer glorot_uniform(Shape shape, std::size_t fan_in,
                            std::size_t fan_out, std::mt19937_64& rng);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_PARAMETERS_HPP_
