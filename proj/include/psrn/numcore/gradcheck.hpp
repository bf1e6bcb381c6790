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

#ifndef PSRN_NUMCORE_GRADCHECK_HPP_
#define PSRN_NUMCORE_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psrn/numcore/parameters.hpp"

namespace psrn::numcore {

enum class GradMode { kValueOnly, kAccumulate };

// Evaluates a scalar loss at the current parameter values. In kAccumulate
// mode it must also add d(loss)/d(param) into each parameter's gradient.
using LossClosure = std::function<double(ParameterSet&, GradMode)>;

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t max_coords_per_tensor = 200;
  std::uint64_t seed = 0;
};

struct TensorGradError {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double analytic_at_max = 0.0;
  double numeric_at_max = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<TensorGradError> tensors;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Central finite differences over at most max_coords_per_tensor sampled
// coordinates of every non-frozen parameter. Parameter values are restored
// and gradients zeroed on return. Throws DeterminismError when two
// evaluations at the same point disagree.
GradCheckReport grad_check(const LossClosure& closure, ParameterSet& params,
                           const GradCheckOptions& options = {});

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_GRADCHECK_HPP_
