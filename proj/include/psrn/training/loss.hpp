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

#ifndef PSRN_TRAINING_LOSS_HPP_
#define PSRN_TRAINING_LOSS_HPP_

#include <span>

#include "psrn/training/model.hpp"

namespace psrn::training {

struct LossFlags {
  bool position = true;
  bool velocity = true;
  bool relation = true;
};

// Inactive terms are reported as 0; total is exactly the sum of the four.
struct LossBreakdown {
  double position = 0.0;
  double velocity = 0.0;
  double relation = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

inline constexpr double kDefaultWeightDecay = 4e-5;

// Each active head contributes its cross-entropy averaged over the batch,
// with unit coefficients; regularization is weight_decay * ||theta||^2 over
// the non-frozen parameters. With `accumulate`, d(total)/d(theta) is added
// into the parameter gradients (including the 2 * weight_decay * theta term).
LossBreakdown total_loss(std::span<const Sample> batch, ParameterSet& params,
                         const ModelConfig& config, const LossFlags& flags,
                         double weight_decay, bool accumulate);

}  // namespace psrn::training

#endif  // PSRN_TRAINING_LOSS_HPP_
