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

#include "psrn/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const LossClosure& closure, ParameterSet& params,
                           const GradCheckOptions& options) {
  params.zero_grad();
  const double base = closure(params, GradMode::kAccumulate);
  const double again = closure(params, GradMode::kValueOnly);
  if (base != again) {
    params.zero_grad();
    throw DeterminismError("loss closure is not deterministic: " +
                           std::to_string(base) + " vs " +
                           std::to_string(again));
  }

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (auto& [name, param] : params.entries()) {
    if (param.frozen) continue;
    TensorBuffer& tensor = param.tensor;
    const std::vector<double> analytic(tensor.grad().begin(),
                                       tensor.grad().end());
    std::vector<std::size_t> coords(tensor.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.max_coords_per_tensor) {
      std::vector<std::size_t> picked;
      std::sample(coords.begin(), coords.end(), std::back_inserter(picked),
                  options.max_coords_per_tensor, rng);
      coords = std::move(picked);
    }

    TensorGradError entry{name, coords.size()};
    for (std::size_t idx : coords) {
      const double original = tensor[idx];
      tensor[idx] = original + options.step;
      const double plus = closure(params, GradMode::kValueOnly);
      tensor[idx] = original - options.step;
      const double minus = closure(params, GradMode::kValueOnly);
      tensor[idx] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double err = relative_error(analytic[idx], numeric);
      if (err >= entry.max_rel_error) {
        entry.max_rel_error = err;
        entry.analytic_at_max = analytic[idx];
        entry.numeric_at_max = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.tensors.push_back(entry);
  }
  params.zero_grad();
  return report;
}

}  // namespace psrn::numcore
