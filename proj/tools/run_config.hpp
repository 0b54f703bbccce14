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

#ifndef HFTTC__TOOLS__RUN_CONFIG_HPP_
#define HFTTC__TOOLS__RUN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hfttc::cli
{

/// Raised for anything the user got wrong in flags or the config file.
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Every setting a subcommand can read. Unset fields fall back to the
/// subcommand's default.
struct RunOptions
{
  std::optional<std::string> subcommand;
  std::optional<std::string> data;
  std::optional<std::string> checkpoint;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<std::size_t> modes;
  std::optional<std::size_t> node_dim;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> ffn_hidden;
  std::optional<std::size_t> history;
  std::optional<std::size_t> future;
  std::optional<double> lambda;
  std::optional<double> lr;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> behavior;
  std::optional<std::vector<std::string>> ablate;
  std::optional<double> rx;
  std::optional<double> ry;
  std::optional<double> horizon;
  std::optional<bool> traditional;
  std::optional<std::string> split;
  std::optional<double> train_fraction;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::size_t> max_scenes;
  std::optional<std::string> scene;
  std::optional<std::size_t> stride;
  std::optional<double> radius;
  std::optional<std::size_t> max_ambient;
  std::optional<double> snapshot_interval;
};

/// Reads a JSON config file whose keys mirror the long flags with
/// underscores. Unknown keys and wrong types raise UsageError.
RunOptions options_from_file(const std::string & path);

/// Field-wise: `flags` wins where set, else `file`.
RunOptions merge(const RunOptions & flags, const RunOptions & file);

/// Ablation switches after validating the tags.
struct Ablation
{
  bool gnn = false;
  bool deterministic = false;
  bool kinematic = false;
};
Ablation parse_ablation(const std::optional<std::vector<std::string>> & tags);

/// Validated behavior list: "all" or a comma-joined subset.
std::string parse_behavior(const std::optional<std::string> & tag);

/// `--out`, else $HFTTC_OUT, else "out".
std::string output_dir(const RunOptions & o);

}  // namespace hfttc::cli

#endif  // HFTTC__TOOLS__RUN_CONFIG_HPP_
