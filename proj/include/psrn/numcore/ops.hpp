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

#ifndef PSRN_NUMCORE_OPS_HPP_
#define PSRN_NUMCORE_OPS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psrn/numcore/tape.hpp"

namespace psrn::numcore {

enum class Activation { kIdentity, kSigmoid, kTanh, kRelu };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation kind);

// weights * input + bias. `input` is either a vector [n_in] or a row batch
// [m x n_in]; the result is [n_out] or [m x n_out] respectively.
Var affine(Var input, Var weights, std::optional<Var> bias);

Var activate(Var input, Activation kind);
inline Var sigmoid(Var x) { return activate(x, Activation::kSigmoid); }
inline Var tanh(Var x) { return activate(x, Activation::kTanh); }
inline Var relu(Var x) { return activate(x, Activation::kRelu); }

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// Adds vector v to every row of matrix m.
Var add_rowwise(Var m, Var v);
// Elementwise sum of equally shaped values.
Var sum(std::span<const Var> terms);
Var mean(std::span<const Var> terms);

// Concatenation along the last axis. All parts share rank; for matrices the
// row counts must match.
Var concat(std::span<const Var> parts);
Var slice(Var v, std::size_t begin, std::size_t length);
Var row(Var m, std::size_t index);
Var rows(Var m, std::size_t begin, std::size_t count);
Var stack_rows(std::span<const Var> vectors);
Var tile_rows(Var v, std::size_t count);
Var sum_rows(Var m);
Var reshape(Var v, Shape shape);

// Max-subtracted softmax over a vector.
Var softmax(Var logits);
// sum_i weights[i] * m[i, :]
Var weighted_sum_rows(Var weights, Var m);
// -log softmax(logits)[label], as a one-element tensor.
Var cross_entropy(Var logits, std::size_t label);

// Stride-1 "same" convolution over an H x W x C_in image with a
// [C_out x k x k x C_in] kernel (k odd) and [C_out] bias.
Var conv2d(Var image, Var kernel, Var bias);
// Non-overlapping max pooling with a square window over an H x W x C image;
// the window must divide H and W.
Var max_pool(Var image, std::size_t window);
inline Var max_pool2(Var image) { return max_pool(image, 2); }

// Tape-free helpers shared by evaluation code.
std::vector<double> softmax_values(std::span<const double> logits);
std::size_t argmax(std::span<const double> values);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_OPS_HPP_
