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

#include "psrn/training/loss.hpp"

#include <vector>

#include "psrn/numcore/adam.hpp"
#include "psrn/numcore/error.hpp"
#include "psrn/numcore/ops.hpp"

namespace psrn::training {

LossBreakdown total_loss(std::span<const Sample> batch, ParameterSet& params,
                         const ModelConfig& config, const LossFlags& flags,
                         double weight_decay, bool accumulate) {
  if (batch.empty()) throw DataError("loss over an empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  LossBreakdown out;
  for (const Sample& sample : batch) {
    if (!sample.video->label) {
      throw DataError("video '" + sample.video->video_id + "' has no label");
    }
    const std::size_t label = static_cast<std::size_t>(*sample.video->label);
    Tape tape;
    const ModelForward fwd =
        model_forward(tape, params, config, sample, flags.relation);
    std::vector<Var> terms;
    if (flags.position) {
      const Var l = numcore::cross_entropy(fwd.position_logits, label);
      out.position += tape.scalar(l) * inv;
      terms.push_back(l);
    }
    if (flags.velocity) {
      const Var l = numcore::cross_entropy(fwd.velocity_logits, label);
      out.velocity += tape.scalar(l) * inv;
      terms.push_back(l);
    }
    if (flags.relation) {
      const Var l = numcore::cross_entropy(fwd.relation->logits, label);
      out.relation += tape.scalar(l) * inv;
      terms.push_back(l);
    }
    if (accumulate && !terms.empty()) {
      tape.backward(numcore::scale(numcore::sum(terms), inv));
    }
  }
  out.regularization = numcore::l2_penalty(params, weight_decay);
  if (accumulate && weight_decay != 0.0) {
    for (auto& [name, p] : params.entries()) {
      if (p.frozen) continue;
      const auto values = p.tensor.values();
      const auto grad = p.tensor.grad();
      for (std::size_t i = 0; i < values.size(); ++i) {
        grad[i] += 2.0 * weight_decay * values[i];
      }
    }
  }
  out.total = out.position + out.velocity + out.relation + out.regularization;
  return out;
}

}  // namespace psrn::training
