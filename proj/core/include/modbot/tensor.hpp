// Copyright 2026 The Modbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODBOT_TENSOR_HPP_
#define MODBOT_TENSOR_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace modbot {

// Dense row-major tensor of 64-bit floats. Rank 1 (vectors/biases) and
// rank 2 (matrices, [rows, cols] batches) cover every consumer here.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  static Tensor row(std::vector<double> values);  // [1, n]

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(v_.size()); }

  // Rank-1 tensors behave as a single row in matrix contexts.
  int rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  int cols() const { return shape_.empty() ? 0 : shape_.back(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<const double> values() const { return v_; }
  std::span<double> values() { return v_; }

  double& operator[](int64_t i) { return v_[i]; }
  double operator[](int64_t i) const { return v_[i]; }
  double& at(int r, int c) { return v_[static_cast<int64_t>(r) * cols() + c]; }
  double at(int r, int c) const { return v_[static_cast<int64_t>(r) * cols() + c]; }

  bool all_finite() const;
  bool same_values(const Tensor& other) const;  // bitwise comparison

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<double> v_;
};

}  // namespace modbot

#endif  // MODBOT_TENSOR_HPP_
