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

#ifndef HFTTC__CORE__AUTOGRAD_HPP_
#define HFTTC__CORE__AUTOGRAD_HPP_

#include "hfttc/core/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hfttc::numerics
{

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var
{
public:
  Var() = default;

  const Tensor & value() const;
  std::size_t id() const { return id_; }
  Tape * tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape * tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape * tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients keyed by parameter name.
using GradientMap = std::map<std::string, Tensor>;

/// Records primitive applications in evaluation order and runs the reverse
/// pass over them. Node ids are topologically sorted by construction, so the
/// graph is acyclic.
class Tape
{
public:
  using Backward = std::function<void(Tape &, const Tensor & out_grad)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape & operator=(const Tape &) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Unnamed differentiable leaf.
  Var input(Tensor value);
  /// Named trainable leaf; reported by gradient().
  Var parameter(std::string name, Tensor value);

  const Tensor & value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse pass from a scalar node. Throws ContractError for non-scalar
  /// losses.
  void backward(Var loss);

  /// Gradient accumulated for a node by the last backward(); zeros when the
  /// node was not reached.
  Tensor grad(Var v) const;

  /// backward() followed by collection of every named parameter's gradient.
  GradientMap gradient(Var loss);

  /// Appends an op node. `fn` receives the output gradient and must
  /// accumulate into parents through accumulate().
  Var record(Tensor value, std::span<const Var> parents, Backward fn);

  /// Adds `g` into the gradient buffer of node `id` if it requires one.
  void accumulate(std::size_t id, const Tensor & g);
  /// Mutable gradient buffer, allocated on first use.
  Tensor & grad_buffer(std::size_t id);

private:
  struct Node
  {
    Tensor value;
    Tensor grad;
    Backward backward;
    bool requires_grad = false;
    std::string name;
  };

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Forward kernels on plain tensors.

Tensor linear(const Tensor & x, const Tensor & w);
Tensor linear(const Tensor & x, const Tensor & w, const Tensor & b);
Tensor relu(const Tensor & x);
/// Row-wise softmax with max subtraction. Rank-1 input is one row.
Tensor softmax(const Tensor & z);
Tensor layer_norm(const Tensor & x, const Tensor & gamma, const Tensor & beta, double eps = 1e-5);
Tensor cosine_similarity(const Tensor & a, const Tensor & b);

// ---------------------------------------------------------------------------
// Differentiable primitives. Operands must live on the same tape.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// x (n x p) times w (p x q).
Var linear(Var x, Var w);
/// x w + b with b broadcast over rows.
Var linear(Var x, Var w, Var b);
Var transpose(Var a);
Var relu(Var x);
Var softmax_rows(Var z);
/// Softmax restricted per row to entries with mask != 0; masked entries are
/// exactly zero. Every row needs at least one unmasked entry.
Var masked_softmax_rows(Var z, std::span<const std::uint8_t> mask);
Var log_softmax_rows(Var z);
Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
/// Column means, 1 x k.
Var mean_rows(Var a);
/// Sum of all entries, scalar.
Var sum(Var a);
/// Sum of squared differences, scalar.
Var squared_error(Var a, Var b);
/// Per-row sum of squared differences, n x 1.
Var squared_error_rows(Var a, Var b);
/// Per-row Euclidean norm, n x 1. The gradient at a zero row is zero.
Var l2_norm_rows(Var a);
/// Pairwise row cosine similarity, n x m. Zero-norm rows give 0.
Var cosine_similarity(Var a, Var b);

}  // namespace hfttc::numerics

#endif  // HFTTC__CORE__AUTOGRAD_HPP_
