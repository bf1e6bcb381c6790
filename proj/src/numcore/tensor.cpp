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

#include "psrn/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw DimensionError("tensor shape " + shape_string(shape) +
                           " has a zero extent");
    }
  }
}

}  // namespace

TensorBuffer::TensorBuffer(Shape shape, double fill)
    : shape_(std::move(shape)), values_(shape_size(shape_), fill) {
  validate_shape(shape_);
}

TensorBuffer::TensorBuffer(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  if (values_.size() != shape_size(shape_)) {
    throw DimensionError("tensor shape " + shape_string(shape_) + " needs " +
                         std::to_string(shape_size(shape_)) +
                         " values, got " + std::to_string(values_.size()));
  }
}

TensorBuffer TensorBuffer::vector(std::initializer_list<double> values) {
  return TensorBuffer({values.size()}, std::vector<double>(values));
}

TensorBuffer TensorBuffer::matrix(std::size_t rows, std::size_t cols,
                                  std::initializer_list<double> values) {
  return TensorBuffer({rows, cols}, std::vector<double>(values));
}

std::size_t TensorBuffer::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw IndexError("axis " + std::to_string(axis) + " out of range for " +
                     shape_string(shape_));
  }
  return shape_[axis];
}

double& TensorBuffer::at(std::size_t row, std::size_t col) {
  return values_[row * shape_.back() + col];
}

double TensorBuffer::at(std::size_t row, std::size_t col) const {
  return values_[row * shape_.back() + col];
}

std::span<double> TensorBuffer::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void TensorBuffer::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool TensorBuffer::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace psrn::numcore
