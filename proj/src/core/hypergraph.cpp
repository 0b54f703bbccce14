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

#include "hfttc/core/hypergraph.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hfttc::hypergraph
{

BinaryMatrix BinaryMatrix::identity(std::size_t n)
{
  BinaryMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1;
  }
  return m;
}

BinaryMatrix BinaryMatrix::ones(std::size_t rows, std::size_t cols)
{
  BinaryMatrix m(rows, cols);
  std::fill(m.data_.begin(), m.data_.end(), 1);
  return m;
}

bool BinaryMatrix::symmetric() const
{
  if (rows_ != cols_) {
    return false;
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) {
        return false;
      }
    }
  }
  return true;
}

Tensor cosine_affinity(const Tensor & features)
{
  const std::size_t n = features.rows(), d = features.cols();
  std::vector<double> sq(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      sq[i] += features(i, k) * features(i, k);
    }
  }
  Tensor a = Tensor::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.0;
      if (sq[i] > 0.0 && sq[j] > 0.0) {
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          dot += features(i, k) * features(j, k);
        }
        // sqrt(x * x) == x exactly, so identical rows score exactly 1.
        v = std::clamp(dot / std::sqrt(sq[i] * sq[j]), -1.0, 1.0);
      }
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

BinaryMatrix infer_topology(const Tensor & affinity, double tau)
{
  if (!(tau >= -1.0 && tau <= 1.0)) {
    std::ostringstream os;
    os << "hypergraph threshold tau must lie in [-1, 1], got " << tau;
    throw ConfigError(os.str());
  }
  const std::size_t n = affinity.rows();
  if (affinity.cols() != n) {
    throw DimensionError("affinity matrix must be square, got " + affinity.shape_string());
  }
  BinaryMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g(i, j) = affinity(i, j) >= tau ? 1 : 0;
    }
  }
  return g;
}

namespace
{
HyperedgeGroups finish(std::size_t n, std::vector<std::vector<std::size_t>> members)
{
  HyperedgeGroups groups;
  groups.vertex_count = n;
  groups.incident.assign(n, {});
  for (std::size_t e = 0; e < members.size(); ++e) {
    for (auto v : members[e]) {
      groups.incident[v].push_back(e);
    }
  }
  groups.members = std::move(members);
  return groups;
}
}  // namespace

HyperedgeGroups groups_from_topology(const BinaryMatrix & topology)
{
  const std::size_t n = topology.rows();
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> row;
    for (std::size_t j = 0; j < topology.cols(); ++j) {
      if (topology(i, j)) {
        row.push_back(j);
      }
    }
    if (row.empty()) {
      continue;
    }
    if (std::find(members.begin(), members.end(), row) == members.end()) {
      members.push_back(std::move(row));
    }
  }
  return finish(n, std::move(members));
}

HyperedgeGroups pairwise_groups(const BinaryMatrix & topology)
{
  const std::size_t n = topology.rows();
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (topology(i, j) || topology(j, i)) {
        members.push_back({i, j});
      }
    }
  }
  return finish(n, std::move(members));
}

HyperedgeGroups singleton_groups(std::size_t n)
{
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) {
    members[i] = {i};
  }
  return finish(n, std::move(members));
}

HyperedgeGroups groups_from_incidence(const BinaryMatrix & incidence)
{
  std::vector<std::vector<std::size_t>> members(incidence.cols());
  for (std::size_t e = 0; e < incidence.cols(); ++e) {
    for (std::size_t v = 0; v < incidence.rows(); ++v) {
      if (incidence(v, e)) {
        members[e].push_back(v);
      }
    }
    if (members[e].empty()) {
      throw ContractError("incidence matrix has an empty hyperedge column");
    }
  }
  return finish(incidence.rows(), std::move(members));
}

BinaryMatrix incidence_matrix(const HyperedgeGroups & groups)
{
  BinaryMatrix h(groups.vertex_count, groups.edge_count());
  for (std::size_t e = 0; e < groups.edge_count(); ++e) {
    for (auto v : groups.members[e]) {
      h(v, e) = 1;
    }
  }
  return h;
}

std::vector<std::vector<std::size_t>> adjacency_from_incidence(const BinaryMatrix & incidence)
{
  const std::size_t n = incidence.rows();
  std::vector<std::vector<std::size_t>> a(n, std::vector<std::size_t>(n, 0));
  for (std::size_t e = 0; e < incidence.cols(); ++e) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!incidence(i, e)) {
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] += incidence(j, e);
      }
    }
  }
  return a;
}

std::vector<std::uint8_t> co_membership_mask(const HyperedgeGroups & groups)
{
  const std::size_t n = groups.vertex_count;
  std::vector<std::uint8_t> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i * n + i] = 1;
  }
  for (const auto & edge : groups.members) {
    for (auto i : edge) {
      for (auto j : edge) {
        mask[i * n + j] = 1;
      }
    }
  }
  return mask;
}

Tensor vertex_from_edge_mean(const HyperedgeGroups & groups)
{
  const std::size_t n = groups.vertex_count;
  Tensor p = Tensor::zeros(n, std::max<std::size_t>(groups.edge_count(), 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto & inc = groups.incident[i];
    for (auto e : inc) {
      p(i, e) = 1.0 / static_cast<double>(inc.size());
    }
  }
  return p;
}

Tensor edge_from_vertex_mean(const HyperedgeGroups & groups)
{
  Tensor q = Tensor::zeros(groups.edge_count(), groups.vertex_count);
  for (std::size_t e = 0; e < groups.edge_count(); ++e) {
    const auto & mem = groups.members[e];
    for (auto v : mem) {
      q(e, v) = 1.0 / static_cast<double>(mem.size());
    }
  }
  return q;
}

nlohmann::ordered_json topology_dump(
  const Tensor & affinity, double tau, const BinaryMatrix & topology, const HyperedgeGroups & groups)
{
  nlohmann::ordered_json doc;
  auto & a = doc["affinity"];
  a = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < affinity.rows(); ++i) {
    std::vector<double> row(affinity.cols());
    for (std::size_t j = 0; j < affinity.cols(); ++j) {
      row[j] = affinity(i, j);
    }
    a.push_back(row);
  }
  doc["tau"] = tau;
  auto & g = doc["topology"];
  g = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < topology.rows(); ++i) {
    std::vector<int> row(topology.cols());
    for (std::size_t j = 0; j < topology.cols(); ++j) {
      row[j] = topology(i, j);
    }
    g.push_back(row);
  }
  doc["hyperedges"] = groups.members;
  return doc;
}

}  // namespace hfttc::hypergraph
