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

#ifndef HFTTC__CORE__MODEL_HPP_
#define HFTTC__CORE__MODEL_HPP_

#include "hfttc/core/autograd.hpp"
#include "hfttc/core/controls.hpp"
#include "hfttc/core/hypergraph.hpp"
#include "hfttc/core/parameters.hpp"
#include "hfttc/core/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hfttc::model
{

using numerics::Tape;
using numerics::Tensor;
using numerics::Var;
using Weights = std::map<std::string, Var>;

/// Architecture and ablation switches. Node and hyperedge features share one
/// width.
struct ModelConfig
{
  std::size_t node_dim = 64;
  std::size_t layers = 2;
  /// Hidden width of the node feed-forward block; 0 means 4 * node_dim.
  std::size_t ffn_hidden = 0;
  std::size_t modes = 5;
  double tau = 0.5;
  std::size_t history = 30;
  std::size_t horizon = 50;
  double dt = 0.1;
  /// Positions are multiplied by this before entering the network.
  double input_scale = 0.1;
  /// Pairwise edges instead of hyperedges.
  bool gnn = false;
  /// Single mode.
  bool deterministic = false;
  /// Constant-velocity host hypothesis at evaluation.
  bool kinematic = false;

  std::size_t mode_count() const { return deterministic ? 1 : modes; }
  std::size_t ffn_width() const { return ffn_hidden == 0 ? 4 * node_dim : ffn_hidden; }

  /// Throws ConfigError for inconsistent values.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  /// Unknown keys and malformed values raise ConfigError.
  static ModelConfig from_json(const nlohmann::json & doc);

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

enum class Phase { train, eval };

/// Where a host trajectory came from.
enum class HostSource { ground_truth, behavior_rollout, constant_velocity };

/// Candidate host future in scene coordinates, T_p positions after the last
/// history frame.
struct HostHypothesis
{
  HostSource source = HostSource::ground_truth;
  std::optional<dynamics::BehaviorMode> behavior;
  std::vector<Point2> trajectory;
};

HostHypothesis ground_truth_hypothesis(const Scene & scene);

/// Host rollout under a behavior model, starting from the state estimated at
/// the last history frame.
HostHypothesis behavior_hypothesis(
  const Scene & scene, dynamics::BehaviorMode mode, std::size_t steps,
  const dynamics::BehaviorConfig & behavior = {});

/// Host extrapolated with the planar velocity of its last two history frames.
HostHypothesis constant_velocity_hypothesis(const Scene & scene, std::size_t steps);

/// Hypothesis the predictor uses at evaluation for a behavior mode; the
/// kinematic ablation replaces it with constant velocity.
HostHypothesis evaluation_hypothesis(
  const Scene & scene, dynamics::BehaviorMode mode, const ModelConfig & config,
  const dynamics::BehaviorConfig & behavior = {});

/// M trajectories and their probabilities for one ambient vehicle.
struct ModeSet
{
  std::int64_t vehicle_id = 0;
  std::vector<std::vector<Point2>> trajectories;
  std::vector<double> probabilities;
};

/// Interaction structure inferred for one scene.
struct SceneTopology
{
  Tensor affinity;
  hypergraph::BinaryMatrix topology;
  hypergraph::HyperedgeGroups groups;
};

/// Differentiable outputs of one forward pass.
struct ForwardGraph
{
  SceneTopology topology;
  Var initial_nodes;
  Var nodes;
  /// Invalid when the scene has no hyperedge.
  Var edges;
  Var host_embedding;
  /// Per mode, (N - 1) x 2 T_p absolute positions, x/y interleaved per frame.
  std::vector<Var> mode_positions;
  /// (N - 1) x M confidence logits and their row softmax.
  Var logits;
  Var probabilities;
  /// Row-stochastic attention weights of every layer.
  std::vector<Tensor> attention;
};

struct Prediction
{
  SceneTopology topology;
  std::vector<ModeSet> ambient;
  std::vector<Tensor> attention;
};

// ---------------------------------------------------------------------------
// Building blocks.

/// N x 2 T_h matrix of scaled history positions.
Tensor history_matrix(const Scene & scene, double scale);
/// 1 x 2 T row of scaled positions.
Tensor trajectory_row(const std::vector<Point2> & trajectory, double scale);

/// Two-layer perceptron over each vehicle's flattened history window.
/// Throws ContractError when the window length differs from the config.
Var embed_history(const Weights & w, Var history, const ModelConfig & config);

/// Host trajectory embedding. Teacher forcing requires ground truth in the
/// train phase; the eval phase rejects ground truth when `strict`.
Var embed_host(
  Tape & tape, const Weights & w, const HostHypothesis & host, Phase phase, const ModelConfig & config,
  bool strict = true);

/// Cosine affinity, threshold and hyperedge construction on node features.
SceneTopology infer_scene_topology(const Tensor & nodes, const ModelConfig & config);

/// Mean of member features per hyperedge.
Var init_hyperedge_features(Tape & tape, Var nodes, const hypergraph::HyperedgeGroups & groups);

struct LayerOutput
{
  Var nodes;
  Var edges;
  Tensor attention;
};

/// One hypergraph-transformer layer. `edges` may be invalid when the scene
/// has no hyperedge.
LayerOutput transformer_layer(
  Tape & tape, const Weights & w, std::size_t layer, Var nodes, Var edges,
  const hypergraph::HyperedgeGroups & groups, const ModelConfig & config);

struct DecodedModes
{
  std::vector<Var> positions;
  Var logits;
  Var probabilities;
};

/// Decoder heads over [n_L ; n_0 ; Z] for rows 1 .. N - 1. `last_positions`
/// holds each ambient vehicle's last observed position (unscaled).
DecodedModes decode_modes(
  Tape & tape, const Weights & w, Var final_nodes, Var initial_nodes, Var host_embedding,
  const std::vector<Point2> & last_positions, const ModelConfig & config);

// ---------------------------------------------------------------------------

/// Parameter names and shapes implied by a configuration.
std::map<std::string, std::vector<std::size_t>> parameter_shapes(const ModelConfig & config);

/// Seeded uniform initialization; layer-norm gains 1, offsets 0 and the
/// confidence-logit outputs 0.
numerics::ParameterStore init_parameters(const ModelConfig & config, std::uint64_t seed);

class Model
{
public:
  Model(ModelConfig config, std::uint64_t seed);
  /// Throws ConfigError when the parameters do not fit the configuration.
  Model(ModelConfig config, numerics::ParameterStore params);

  const ModelConfig & config() const { return config_; }
  const numerics::ParameterStore & parameters() const { return params_; }
  numerics::ParameterStore & parameters() { return params_; }

  ForwardGraph forward(
    Tape & tape, const Weights & w, const Scene & scene, const HostHypothesis & host, Phase phase) const;

  /// Forward pass without gradients, converted to mode sets.
  Prediction predict(const Scene & scene, const HostHypothesis & host, Phase phase = Phase::eval) const;

  /// Writes the parameter checkpoint and its hyperparameter sidecar.
  void save(const std::string & checkpoint_path) const;
  /// Loads a checkpoint. Every key of `expected` (a subset of the config
  /// keys) must equal the sidecar value; ConfigError otherwise.
  static Model load(
    const std::string & checkpoint_path, const nlohmann::json & expected = nlohmann::json::object());

private:
  ModelConfig config_;
  numerics::ParameterStore params_;
};

/// `<dir>/<stem>.hparams.json` next to `<dir>/<stem>.json`.
std::string sidecar_path(const std::string & checkpoint_path);

}  // namespace hfttc::model

#endif  // HFTTC__CORE__MODEL_HPP_
