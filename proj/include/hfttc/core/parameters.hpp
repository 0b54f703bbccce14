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

#ifndef HFTTC__CORE__PARAMETERS_HPP_
#define HFTTC__CORE__PARAMETERS_HPP_

#include "hfttc/core/autograd.hpp"
#include "hfttc/core/tensor.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>

namespace hfttc::numerics
{

/// Uniform double in [0, 1) built from raw engine output so that streams are
/// identical across standard library implementations.
double uniform01(std::mt19937_64 & rng);

/// Named trainable tensors. Iteration order is the lexicographic name order,
/// which fixes the order of initialization and serialization.
class ParameterStore
{
public:
  using Map = std::map<std::string, Tensor>;

  void set(const std::string & name, Tensor value);
  const Tensor & get(const std::string & name) const;
  Tensor & get(const std::string & name);
  bool contains(const std::string & name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  const Map & entries() const { return params_; }
  Map & entries() { return params_; }

  /// Registers every parameter on `tape` as a named leaf.
  std::map<std::string, Var> bind(Tape & tape) const;

  friend bool operator==(const ParameterStore & a, const ParameterStore & b) = default;

private:
  Map params_;
};

/// Weight of shape fan_in x fan_out drawn from U(-sqrt(1/fan_in), sqrt(1/fan_in)).
Tensor uniform_init(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng);
/// Bias of length `size` drawn with the same bound as uniform_init(fan_in, .).
Tensor uniform_bias(std::size_t fan_in, std::size_t size, std::mt19937_64 & rng);

/// Checkpoint document: {"format", "version", "parameters": [{name, shape,
/// values}]} with every value stored as a C99 hex-float string.
std::string checkpoint_to_json(const ParameterStore & params);
ParameterStore checkpoint_from_json(const std::string & text);

void save_checkpoint(const ParameterStore & params, const std::string & path);
ParameterStore load_checkpoint(const std::string & path);

std::string hex_double(double v);
double parse_hex_double(const std::string & s);

}  // namespace hfttc::numerics

#endif  // HFTTC__CORE__PARAMETERS_HPP_
