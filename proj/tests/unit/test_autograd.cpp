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

#include "gradcheck.hpp"

#include "hfttc/core/autograd.hpp"
#include "hfttc/core/errors.hpp"
#include "hfttc/core/parameters.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace
{

using hfttc::numerics::ParameterStore;
using hfttc::numerics::Tape;
using hfttc::numerics::Tensor;
using hfttc::numerics::Var;
namespace nx = hfttc::numerics;

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64 & rng, double scale = 1.0)
{
  Tensor t = Tensor::zeros(r, c);
  for (auto & v : t.values()) {
    v = scale * (2.0 * nx::uniform01(rng) - 1.0);
  }
  return t;
}

}  // namespace

TEST(Linear, IdentityRowsPickWeightRows)
{
  const auto y = nx::linear(Tensor::matrix({{1, 0}, {0, 1}}), Tensor::matrix({{2, 0}, {0, 3}}));
  EXPECT_EQ(y, Tensor::matrix({{2, 0}, {0, 3}}));
}

TEST(Linear, BiasBroadcast)
{
  const auto y = nx::linear(Tensor::matrix({{1, 2}}), Tensor::matrix({{1}, {1}}), Tensor::vector({0.5}));
  ASSERT_EQ(y.size(), 1u);
  EXPECT_DOUBLE_EQ(y[0], 3.5);
}

TEST(Linear, ZeroInput)
{
  std::mt19937_64 rng(3);
  const auto y = nx::linear(Tensor::zeros(3, 4), random_matrix(4, 2, rng));
  EXPECT_EQ(y, Tensor::zeros(3, 2));
}

TEST(Linear, ShapeMismatchNamesBothShapes)
{
  try {
    nx::linear(Tensor::zeros(2, 3), Tensor::zeros(2, 2));
    FAIL() << "expected DimensionError";
  } catch (const hfttc::DimensionError & e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_NE(msg.find("[2x2]"), std::string::npos);
  }
}

TEST(Softmax, Symmetric)
{
  const auto p = nx::softmax(Tensor::vector({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, LargeLogitsDoNotOverflow)
{
  const auto p = nx::softmax(Tensor::vector({1000.0, 1000.0, 1000.0}));
  for (double v : p.values()) {
    EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(Softmax, LogRatio)
{
  const auto p = nx::softmax(Tensor::vector({std::log(1.0), std::log(3.0)}));
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(Softmax, EmptyInputIsDomainError)
{
  EXPECT_THROW(nx::softmax(Tensor{}), hfttc::DomainError);
}

TEST(Softmax, SumsToOneAndPermutationEquivariant)
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> z(n);
    for (auto & v : z) {
      v = 2000.0 * nx::uniform01(rng) - 1000.0;
    }
    const auto p = nx::softmax(Tensor::vector(z));
    const double total = std::accumulate(p.values().begin(), p.values().end(), 0.0);
    EXPECT_LT(std::abs(total - 1.0), 1e-9);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> zp(n);
    for (std::size_t i = 0; i < n; ++i) {
      zp[i] = z[perm[i]];
    }
    const auto pp = nx::softmax(Tensor::vector(zp));
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(pp[i], p[perm[i]], 1e-15);
      EXPECT_TRUE(std::isfinite(pp[i]));
    }
  }
}

TEST(LayerNorm, ZeroVarianceIsGuarded)
{
  const auto y = nx::layer_norm(
    Tensor::vector({5, 5, 5}), Tensor::vector({1, 1, 1}), Tensor::vector({0, 0, 0}));
  for (double v : y.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(LayerNorm, UnitVarianceInput)
{
  const auto y = nx::layer_norm(Tensor::vector({1, -1}), Tensor::vector({1, 1}), Tensor::vector({0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], -1.0);
}

TEST(LayerNorm, AffineTransform)
{
  const auto y = nx::layer_norm(Tensor::vector({1, -1}), Tensor::vector({2, 2}), Tensor::vector({1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], -1.0);
}

TEST(LayerNorm, NormalizedMoments)
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    Tensor x = random_matrix(1, n, rng, 1000.0);
    const auto y = nx::layer_norm(x, Tensor::filled(1, n, 1.0), Tensor::zeros(1, n));
    double mean = 0.0;
    for (double v : y.values()) {
      mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y.values()) {
      var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(n);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-3);
  }
}

TEST(Gradient, SquareAtThree)
{
  Tape tape;
  auto x = tape.parameter("x", Tensor::scalar(3.0));
  auto g = tape.gradient(nx::mul(x, x));
  EXPECT_DOUBLE_EQ(g.at("x")[0], 6.0);
}

TEST(Gradient, SoftmaxProjection)
{
  Tape tape;
  auto x = tape.parameter("x", Tensor::matrix({{0.0, 0.0}}));
  auto e = tape.constant(Tensor::matrix({{1.0, 0.0}}));
  auto g = tape.gradient(nx::sum(nx::mul(nx::softmax_rows(x), e)));
  EXPECT_NEAR(g.at("x")[0], 0.25, 1e-15);
  EXPECT_NEAR(g.at("x")[1], -0.25, 1e-15);
}

TEST(Gradient, NonScalarLossIsContractError)
{
  Tape tape;
  auto x = tape.parameter("x", Tensor::matrix({{1.0, 2.0}}));
  EXPECT_THROW(tape.backward(x), hfttc::ContractError);
}

TEST(Gradient, LinearLeastSquaresMatchesFiniteDifferences)
{
  std::mt19937_64 rng(17);
  const Tensor x = random_matrix(4, 3, rng);
  const Tensor y = random_matrix(4, 2, rng);
  ParameterStore params;
  params.set("W", random_matrix(3, 2, rng));
  const auto r = hfttc::testing::gradient_check(params, [&](Tape & t, const auto & v) {
    return nx::squared_error(nx::linear(t.constant(x), v.at("W")), t.constant(y));
  });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

// Random composite graphs exercising every primitive.
TEST(Gradient, EveryPrimitiveMatchesFiniteDifferences)
{
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const std::size_t p = 2 + rng() % 5;
    const std::size_t q = 2 + rng() % 5;
    ParameterStore params;
    params.set("x", random_matrix(n, p, rng));
    params.set("W", random_matrix(p, q, rng));
    params.set("b", random_matrix(1, q, rng));
    params.set("gamma", random_matrix(1, q, rng));
    params.set("beta", random_matrix(1, q, rng));
    params.set("u", random_matrix(n, q, rng));
    params.set("z", random_matrix(n, n, rng));
    std::vector<std::uint8_t> mask(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        mask[i * n + j] = (i == j || nx::uniform01(rng) < 0.5) ? 1 : 0;
      }
    }
    const Tensor target = random_matrix(n, q, rng);
    const auto r = hfttc::testing::gradient_check(params, [&](Tape & t, const auto & v) {
      auto h = nx::linear(v.at("x"), v.at("W"), v.at("b"));
      auto hr = nx::relu(h);
      auto ln = nx::layer_norm_rows(h, v.at("gamma"), v.at("beta"));
      auto att = nx::masked_softmax_rows(v.at("z"), mask);
      auto mixed = nx::linear(att, ln);
      auto sm = nx::softmax_rows(v.at("u"));
      auto lsm = nx::log_softmax_rows(v.at("u"));
      const Var parts[] = {mixed, hr};
      auto cat = nx::concat_cols(parts);
      auto left = nx::slice_cols(cat, 0, q);
      auto top = nx::slice_rows(nx::transpose(left), 0, 1);
      auto cos = nx::cosine_similarity(v.at("u"), mixed);
      auto norms = nx::l2_norm_rows(v.at("u"));
      auto err_rows = nx::squared_error_rows(left, t.constant(target));
      auto total = nx::add(nx::sum(nx::mul(sm, lsm)), nx::sum(cos));
      total = nx::add(total, nx::scale(nx::sum(norms), 0.5));
      total = nx::add(total, nx::sum(err_rows));
      total = nx::sub(total, nx::sum(nx::mean_rows(top)));
      total = nx::add(total, nx::squared_error(hr, t.constant(target)));
      return total;
    });
    EXPECT_LT(r.max_rel_error, 1e-4) << "trial " << trial << " worst " << r.worst;
  }
}

TEST(MaskedSoftmax, MaskedEntriesAreZeroAndRowsNormalized)
{
  Tape tape;
  auto z = tape.input(Tensor::matrix({{1.0, 2.0, 3.0}, {0.5, 0.5, 0.5}}));
  const std::uint8_t mask[] = {1, 0, 1, 0, 1, 0};
  const auto p = nx::masked_softmax_rows(z, mask).value();
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_NEAR(p(0, 0) + p(0, 2), 1.0, 1e-15);
  EXPECT_EQ(p(1, 1), 1.0);
}

TEST(CosineSimilarity, ZeroRowGivesZero)
{
  const auto c = nx::cosine_similarity(Tensor::matrix({{0, 0}, {1, 2}}), Tensor::matrix({{2, 1}}));
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_NEAR(c(1, 0), 0.8, 1e-15);
}

TEST(Primitives, FiniteOnExtremeInputs)
{
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const std::size_t p = 1 + rng() % 6;
    Tape tape;
    auto x = tape.parameter("x", random_matrix(n, p, rng, 1e3));
    auto w = tape.parameter("w", random_matrix(p, p, rng, 1e3));
    auto g = tape.parameter("g", random_matrix(1, p, rng, 1e3));
    auto b = tape.parameter("b", random_matrix(1, p, rng, 1e3));
    auto h = nx::linear(x, w, b);
    auto out = nx::add(nx::sum(nx::softmax_rows(h)), nx::sum(nx::log_softmax_rows(h)));
    out = nx::add(out, nx::sum(nx::layer_norm_rows(h, g, b)));
    out = nx::add(out, nx::sum(nx::cosine_similarity(h, x)));
    out = nx::add(out, nx::sum(nx::l2_norm_rows(nx::relu(h))));
    const auto grads = tape.gradient(out);
    EXPECT_TRUE(out.value().all_finite());
    for (const auto & [name, gt] : grads) {
      EXPECT_TRUE(gt.all_finite()) << name;
    }
  }
}
