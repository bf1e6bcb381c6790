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

#include "psrn/numcore/tape.hpp"

#include <algorithm>
#include <string>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw ConsistencyError("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw ConsistencyError("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(TensorBuffer value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(TensorBuffer value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::bind(TensorBuffer& external, bool requires_grad) {
  if (auto it = bound_.find(&external); it != bound_.end()) {
    return Var{this, it->second};
  }
  Node n;
  n.external = &external;
  n.requires_grad = requires_grad;
  Var v = push(std::move(n));
  bound_.emplace(&external, v.id);
  return v;
}

Var Tape::parameter(ParameterSet& params, std::string_view name) {
  auto it = params.entries().find(name);
  if (it == params.entries().end()) {
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
  return bind(it->second.tensor, !it->second.frozen);
}

Var Tape::record(TensorBuffer value, std::initializer_list<Var> parents,
                 BackwardFn backward) {
  return record(std::move(value),
                std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(TensorBuffer value, std::span<const Var> parents,
                 BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(),
                                [this](Var p) { return requires_grad(p); });
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const TensorBuffer& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.owned;
}

double Tape::scalar(Var v) const {
  const TensorBuffer& t = value(v);
  if (t.size() != 1) {
    throw DimensionError("expected a scalar, got shape " +
                         shape_string(t.shape()));
  }
  return t[0];
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

std::span<double> Tape::grad(Var v) {
  Node& n = node(v);
  n.touched = true;
  return n.external ? n.external->grad() : n.owned.grad();
}

std::span<double> Tape::grad_if(Var v) {
  if (!requires_grad(v)) return {};
  return grad(v);
}

void Tape::backward(Var output) {
  if (!requires_grad(output)) return;
  for (double& g : grad(output)) g += 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.touched && n.backward) {
      n.backward(*this, Var{this, static_cast<std::uint32_t>(i)});
    }
  }
}

}  // namespace psrn::numcore
