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

#ifndef PSRN_NUMCORE_TAPE_HPP_
#define PSRN_NUMCORE_TAPE_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <unordered_map>

#include "psrn/numcore/parameters.hpp"
#include "psrn/numcore/tensor.hpp"

namespace psrn::numcore {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only meaningful while
// the owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return tape != nullptr; }
};

// Reverse-mode gradient tape. Every op appends a node holding its output value
// and a closure that pushes the output gradient back to its parents. Parameter
// nodes alias the caller's TensorBuffer, so backward() accumulates straight
// into ParameterSet gradients and a forward-only pass never writes to them.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(TensorBuffer value);
  Var variable(TensorBuffer value);
  // Binds a named parameter. Frozen parameters are bound as constants, so no
  // gradient ever reaches them. Repeated binds of the same name share a node.
  Var parameter(ParameterSet& params, std::string_view name);
  Var bind(TensorBuffer& external, bool requires_grad);

  // Appends an op node. requires_grad is inherited from the parents; when no
  // parent needs a gradient the closure is dropped.
  Var record(TensorBuffer value, std::initializer_list<Var> parents,
             BackwardFn backward);
  Var record(TensorBuffer value, std::span<const Var> parents,
             BackwardFn backward);

  const TensorBuffer& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  double scalar(Var v) const;
  bool requires_grad(Var v) const;

  // Gradient storage of v, allocated on first use.
  std::span<double> grad(Var v);
  // Empty span when v does not require a gradient.
  std::span<double> grad_if(Var v);

  // Seeds d(output)/d(output) = 1 for every element of output and runs all
  // recorded closures in reverse order.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    TensorBuffer owned;
    TensorBuffer* external = nullptr;
    bool requires_grad = false;
    bool touched = false;
    BackwardFn backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node node);

  std::deque<Node> nodes_;
  std::unordered_map<const TensorBuffer*, std::uint32_t> bound_;
};

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_TAPE_HPP_
