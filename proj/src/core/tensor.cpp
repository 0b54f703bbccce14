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

#include "hfttc/core/tensor.hpp"

#include "hfttc/core/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

namespace hfttc::numerics
{

namespace
{
std::size_t element_count(const std::vector<std::size_t> & shape)
{
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2");
  }
  std::size_t n = 1;
  for (auto d : shape) {
    if (d == 0) {
      throw DimensionError("tensor dimensions must be positive");
    }
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
: shape_(std::move(shape)), data_(element_count(shape_), 0.0)
{
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
: shape_(std::move(shape)), data_(std::move(data))
{
  if (element_count(shape_) != data_.size()) {
    std::ostringstream os;
    os << "tensor data length " << data_.size() << " does not match shape " << shape_string();
    throw DimensionError(os.str());
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values)
{
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
{
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows)
{
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto & row : rows) {
    if (row.size() != c) {
      throw DimensionError("ragged matrix literal");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double value)
{
  return Tensor({rows, cols}, std::vector<double>(rows * cols, value));
}

std::size_t Tensor::rows() const { return shape_.size() == 2 ? shape_[0] : (shape_.empty() ? 0 : 1); }

std::size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

bool Tensor::all_finite() const
{
  for (double v : data_) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

std::string Tensor::shape_string() const
{
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    os << (i ? "x" : "") << shape_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace hfttc::numerics
