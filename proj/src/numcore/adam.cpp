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

#include "psrn/numcore/adam.hpp"

#include <cmath>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

AdamState::AdamState(const ParameterSet& params, AdamConfig config)
    : config_(config) {
  for (const auto& [name, param] : params.entries()) {
    if (param.frozen) continue;
    moments_.emplace(name, Moments{std::vector<double>(param.tensor.size()),
                                   std::vector<double>(param.tensor.size())});
  }
}

void adam_step(ParameterSet& params, AdamState& state, double learning_rate,
               double weight_decay) {
  // Validate the whole state before touching any value.
  for (const auto& [name, param] : params.entries()) {
    const bool tracked = state.moments_.count(name) > 0;
    if (param.frozen && tracked) {
      throw ConsistencyError("frozen parameter '" + name +
                             "' has optimizer moment state");
    }
    if (!param.frozen && !tracked) {
      throw ConsistencyError("trainable parameter '" + name +
                             "' has no optimizer moment state");
    }
  }
  for (const auto& [name, moments] : state.moments_) {
    if (!params.contains(name)) {
      throw ConsistencyError("optimizer state names unknown parameter '" +
                             name + "'");
    }
    if (moments.first.size() != params.at(name).size()) {
      throw ConsistencyError("optimizer state for '" + name +
                             "' has the wrong size");
    }
  }

  state.step_ += 1;
  const AdamConfig& cfg = state.config_;
  const double t = static_cast<double>(state.step_);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, moments] : state.moments_) {
    TensorBuffer& p = params.at(name);
    std::span<double> values = p.values();
    std::span<const double> grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i] + 2.0 * weight_decay * values[i];
      double& m = moments.first[i];
      double& v = moments.second[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
  params.zero_grad();
}

double l2_penalty(const ParameterSet& params, double weight_decay) {
  double total = 0.0;
  for (const auto& [name, param] : params.entries()) {
    if (param.frozen) continue;
    for (double v : param.tensor.values()) total += v * v;
  }
  return weight_decay * total;
}

std::optional<std::string> first_non_finite(const ParameterSet& params) {
  for (const auto& [name, param] : params.entries()) {
    if (!param.tensor.all_finite()) return name;
    for (double g : param.tensor.grad()) {
      if (!std::isfinite(g)) return name;
    }
  }
  return std::nullopt;
}

}  // namespace psrn::numcore
