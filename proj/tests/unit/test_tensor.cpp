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

#include "hfttc/core/errors.hpp"
#include "hfttc/core/tensor.hpp"

#include <gtest/gtest.h>

#include <limits>

using hfttc::numerics::Tensor;

TEST(Tensor, ZeroFilledConstruction)
{
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  for (double v : t.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Tensor, DataLengthMustMatchShape)
{
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), hfttc::DimensionError);
  EXPECT_THROW(Tensor({0, 2}), hfttc::DimensionError);
}

TEST(Tensor, RankOneActsAsRow)
{
  const auto v = Tensor::vector({1.0, 2.0, 3.0});
  EXPECT_EQ(v.rank(), 1u);
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 3u);
  EXPECT_EQ(v(0, 2), 3.0);
}

TEST(Tensor, MatrixLiteral)
{
  const auto m = Tensor::matrix({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(m(1, 0), 3.0);
  EXPECT_EQ(m.shape_string(), "[2x2]");
  EXPECT_THROW(Tensor::matrix({{1.0, 2.0}, {3.0}}), hfttc::DimensionError);
}

TEST(Tensor, FiniteCheck)
{
  auto m = Tensor::filled(2, 2, 1.0);
  EXPECT_TRUE(m.all_finite());
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(m.all_finite());
}
