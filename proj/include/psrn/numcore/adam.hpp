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

#ifndef PSRN_NUMCORE_ADAM_HPP_
#define PSRN_NUMCORE_ADAM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psrn/numcore/parameters.hpp"

namespace psrn::numcore {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators for exactly the parameters that were not
// frozen when the state was created. A frozen parameter therefore has nowhere
// to receive an update.
class AdamState {
 public:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };

  explicit AdamState(const ParameterSet& params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const std::map<std::string, Moments, std::less<>>& moments() const {
    return moments_;
  }
  bool tracks(const std::string& name) const { return moments_.count(name); }

 private:
  friend void adam_step(ParameterSet&, AdamState&, double, double);

  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::map<std::string, Moments, std::less<>> moments_;
};

// One bias-corrected Adam update. The decay term contributes
// 2 * weight_decay * theta to each gradient before the moment update (the
// gradient of weight_decay * ||theta||^2). All gradients are zeroed after.
void adam_step(ParameterSet& params, AdamState& state, double learning_rate,
               double weight_decay);

// weight_decay * sum of squares over the non-frozen parameters.
double l2_penalty(const ParameterSet& params, double weight_decay);

// Name of the first parameter whose values or gradients are not finite.
std::optional<std::string> first_non_finite(const ParameterSet& params);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_ADAM_HPP_
