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

#ifndef PSRN_CLI_GRADCHECK_SUITE_HPP_
#define PSRN_CLI_GRADCHECK_SUITE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace psrn::cli {

inline constexpr double kGradTolerance = 1e-4;

struct ModuleCheck {
  std::string module;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_tensor;
  // Analytic and finite-difference values at the worst coordinate.
  double analytic_at_max = 0.0;
  double numeric_at_max = 0.0;
};

struct GradSuiteReport {
  double tolerance = kGradTolerance;
  std::vector<ModuleCheck> modules;

  double max_rel_error() const;
  bool passed() const;
};

// Central-difference checks of every differentiable module on a small random
// model: part encoders, attention, LSTM cell, lookback, convolution stub,
// relation g/f, each loss head, and the end-to-end objective.
GradSuiteReport run_gradcheck_suite(std::uint64_t seed);

nlohmann::json gradcheck_to_json(const GradSuiteReport& report);

}  // namespace psrn::cli

#endif  // PSRN_CLI_GRADCHECK_SUITE_HPP_
