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

#ifndef HFTTC__CORE__HYPERGRAPH_HPP_
#define HFTTC__CORE__HYPERGRAPH_HPP_

#include "hfttc/core/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hfttc::hypergraph
{

using numerics::Tensor;

/// Dense 0/1 matrix.
class BinaryMatrix
{
public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static BinaryMatrix identity(std::size_t n);
  static BinaryMatrix ones(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::uint8_t & operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const std::vector<std::uint8_t> & data() const { return data_; }

  bool symmetric() const;

  friend bool operator==(const BinaryMatrix &, const BinaryMatrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Hyperedges with their member vertices and, per vertex, the incident
/// hyperedges. Member and incidence lists are sorted and duplicate-free.
struct HyperedgeGroups
{
  std::size_t vertex_count = 0;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::vector<std::size_t>> incident;

  std::size_t edge_count() const { return members.size(); }
};

/// Pairwise cosine similarity of node feature rows. Symmetric, unit diagonal;
/// rows with zero norm have zero affinity to every other row.
Tensor cosine_affinity(const Tensor & features);

/// G_ij = 1 iff A_ij >= tau. Throws ConfigError unless -1 <= tau <= 1.
BinaryMatrix infer_topology(const Tensor & affinity, double tau);

/// One hyperedge {j | G_ij = 1} per vertex i, exact duplicates merged
/// (first occurrence kept).
HyperedgeGroups groups_from_topology(const BinaryMatrix & topology);

/// Graph restriction used by the pairwise ablation: one edge {i, j} for
/// every i < j with G_ij = 1. Isolated vertices have no incident edge.
HyperedgeGroups pairwise_groups(const BinaryMatrix & topology);

HyperedgeGroups singleton_groups(std::size_t n);

/// Rebuilds membership lists from an incidence matrix. Throws ContractError
/// for an empty column.
HyperedgeGroups groups_from_incidence(const BinaryMatrix & incidence);

/// |V| x |E| membership matrix.
BinaryMatrix incidence_matrix(const HyperedgeGroups & groups);

/// A_ij = number of hyperedges containing both v_i and v_j.
std::vector<std::vector<std::size_t>> adjacency_from_incidence(const BinaryMatrix & incidence);

/// Row-major N x N mask of vertex pairs that share a hyperedge; the diagonal
/// is always set.
std::vector<std::uint8_t> co_membership_mask(const HyperedgeGroups & groups);

/// N x E averaging operator over each vertex's incident hyperedges (zero row
/// for a vertex without any).
Tensor vertex_from_edge_mean(const HyperedgeGroups & groups);

/// E x N averaging operator over each hyperedge's members.
Tensor edge_from_vertex_mean(const HyperedgeGroups & groups);

/// {"affinity", "tau", "topology", "hyperedges"} document.
nlohmann::ordered_json topology_dump(
  const Tensor & affinity, double tau, const BinaryMatrix & topology, const HyperedgeGroups & groups);

}  // namespace hfttc::hypergraph

#endif  // HFTTC__CORE__HYPERGRAPH_HPP_
