// Copyright 2026 The hfttc Authors
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

#ifndef HFTTC__CORE__TENSOR_HPP_
#define HFTTC__CORE__TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hfttc::numerics
{

/// Dense row-major tensor of 64-bit floats.
///
/// Rank 1 and rank 2 are the only ranks the operators understand; a rank-1
/// tensor of length n behaves as a 1 x n row wherever a matrix is expected.
class Tensor
{
public:
  Tensor() = default;

  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor filled(std::size_t rows, std::size_t cols, double value);

  const std::vector<std::size_t> & shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Matrix view: rank-1 tensors report one row.
  std::size_t rows() const;
  std::size_t cols() const;

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double & operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double & operator[](std::size_t i) { return data_[i]; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  const std::vector<double> & data() const { return data_; }

  bool all_finite() const;
  bool same_shape(const Tensor & other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  friend bool operator==(const Tensor & a, const Tensor & b) = default;

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace hfttc::numerics

#endif  // HFTTC__CORE__TENSOR_HPP_
