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

#ifndef PSRN_NUMCORE_TENSOR_HPP_
#define PSRN_NUMCORE_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace psrn::numcore {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles with a companion gradient array of the
// same shape. The gradient is allocated on first access and starts at zero.
class TensorBuffer {
 public:
  TensorBuffer() = default;
  explicit TensorBuffer(Shape shape, double fill = 0.0);
  TensorBuffer(Shape shape, std::vector<double> values);

  static TensorBuffer vector(std::initializer_list<double> values);
  static TensorBuffer matrix(std::size_t rows, std::size_t cols,
                             std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& storage() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t row, std::size_t col);
  double at(std::size_t row, std::size_t col) const;

  bool has_grad() const { return !grad_.empty(); }
  std::span<double> grad();
  std::span<const double> grad() const { return grad_; }
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_TENSOR_HPP_
