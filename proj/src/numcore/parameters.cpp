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

#include "psrn/numcore/parameters.hpp"

#include <cmath>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

bool starts_with(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

TensorBuffer& ParameterSet::add(const std::string& name, TensorBuffer value) {
  auto [it, inserted] = entries_.emplace(name, Parameter{std::move(value)});
  if (!inserted) throw ConfigError("duplicate parameter name '" + name + "'");
  return it->second.tensor;
}

bool ParameterSet::contains(std::string_view name) const {
  return entries_.find(name) != entries_.end();
}

TensorBuffer& ParameterSet::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second.tensor;
}

const TensorBuffer& ParameterSet::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second.tensor;
}

void ParameterSet::set_frozen(std::string_view name, bool frozen) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  it->second.frozen = frozen;
}

std::size_t ParameterSet::set_group_frozen(std::string_view prefix,
                                           bool frozen) {
  std::size_t touched = 0;
  for (auto& [name, param] : entries_) {
    if (starts_with(name, prefix)) {
      param.frozen = frozen;
      ++touched;
    }
  }
  return touched;
}

bool ParameterSet::is_frozen(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second.frozen;
}

std::vector<std::string> ParameterSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, param] : entries_) out.push_back(name);
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, param] : entries_) n += param.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, param] : entries_) param.tensor.zero_grad();
}

TensorBuffer glorot_uniform(Shape shape, std::size_t fan_in,
                            std::size_t fan_out, std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  TensorBuffer out(std::move(shape));
  for (double& v : out.values()) v = dist(rng);
  return out;
}

}  // namespace psrn::numcore
