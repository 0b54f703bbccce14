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

#include "hfttc/core/model.hpp"

#include "hfttc/core/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hfttc::model
{

namespace nx = numerics;
namespace hg = hypergraph;
using nlohmann::json;
using nlohmann::ordered_json;

namespace
{

const char * const kConfigKeys[] = {
  "node_dim", "layers", "ffn_hidden", "modes", "tau", "history", "horizon", "dt", "input_scale", "gnn",
  "deterministic", "kinematic"};

[[noreturn]] void config_error(const std::string & what) { throw ConfigError("model config: " + what); }

const Var & weight(const Weights & w, const std::string & name)
{
  const auto it = w.find(name);
  if (it == w.end()) {
    throw ContractError("missing model parameter '" + name + "'");
  }
  return it->second;
}

Var perceptron(const Weights & w, const std::string & prefix, Var x)
{
  auto h = nx::relu(nx::linear(x, weight(w, prefix + ".fc1.weight"), weight(w, prefix + ".fc1.bias")));
  return nx::linear(h, weight(w, prefix + ".fc2.weight"), weight(w, prefix + ".fc2.bias"));
}

std::string layer_prefix(std::size_t l) { return "layer" + std::to_string(l); }
std::string decoder_prefix(std::size_t m) { return "decoder" + std::to_string(m); }

// Lower-triangular accumulation over interleaved (x, y) columns.
Tensor cumulative_operator(std::size_t frames)
{
  const std::size_t w = 2 * frames;
  Tensor c = Tensor::zeros(w, w);
  for (std::size_t j = 0; j < frames; ++j) {
    for (std::size_t k = j; k < frames; ++k) {
      c(2 * j, 2 * k) = 1.0;
      c(2 * j + 1, 2 * k + 1) = 1.0;
    }
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::validate() const
{
  if (node_dim == 0) {
    config_error("node_dim must be positive");
  }
  if (layers == 0) {
    config_error("layers must be positive");
  }
  if (modes == 0) {
    config_error("modes must be at least 1");
  }
  if (!(tau >= -1.0 && tau <= 1.0)) {
    config_error("tau must lie in [-1, 1]");
  }
  if (history < 3) {
    config_error("history must span at least 3 frames");
  }
  if (horizon == 0) {
    config_error("horizon must be positive");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    config_error("dt must be positive");
  }
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
    config_error("input_scale must be positive");
  }
}

ordered_json ModelConfig::to_json() const
{
  ordered_json j;
  j["node_dim"] = node_dim;
  j["layers"] = layers;
  j["ffn_hidden"] = ffn_hidden;
  j["modes"] = modes;
  j["tau"] = tau;
  j["history"] = history;
  j["horizon"] = horizon;
  j["dt"] = dt;
  j["input_scale"] = input_scale;
  j["gnn"] = gnn;
  j["deterministic"] = deterministic;
  j["kinematic"] = kinematic;
  return j;
}

ModelConfig ModelConfig::from_json(const json & doc)
{
  if (!doc.is_object()) {
    config_error("expected a JSON object");
  }
  ModelConfig c;
  for (const auto & [key, value] : doc.items()) {
    bool known = false;
    for (const char * k : kConfigKeys) {
      known = known || key == k;
    }
    if (!known) {
      config_error("unknown key '" + key + "'");
    }
    try {
      if (key == "node_dim" || key == "layers" || key == "ffn_hidden" || key == "modes" || key == "history" ||
          key == "horizon") {
        if (!value.is_number_unsigned()) {
          config_error("'" + key + "' must be a non-negative integer");
        }
        const auto v = value.get<std::size_t>();
        if (key == "node_dim") {
          c.node_dim = v;
        } else if (key == "layers") {
          c.layers = v;
        } else if (key == "ffn_hidden") {
          c.ffn_hidden = v;
        } else if (key == "modes") {
          c.modes = v;
        } else if (key == "history") {
          c.history = v;
        } else {
          c.horizon = v;
        }
      } else if (key == "tau" || key == "dt" || key == "input_scale") {
        if (!value.is_number()) {
          config_error("'" + key + "' must be a number");
        }
        const auto v = value.get<double>();
        (key == "tau" ? c.tau : key == "dt" ? c.dt : c.input_scale) = v;
      } else {
        if (!value.is_boolean()) {
          config_error("'" + key + "' must be a boolean");
        }
        const bool v = value.get<bool>();
        (key == "gnn" ? c.gnn : key == "deterministic" ? c.deterministic : c.kinematic) = v;
      }
    } catch (const json::exception & e) {
      config_error(e.what());
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Host hypotheses

HostHypothesis ground_truth_hypothesis(const Scene & scene)
{
  if (scene.future.empty()) {
    throw ContractError("scene '" + scene.id + "' has no ground-truth future");
  }
  HostHypothesis h;
  h.source = HostSource::ground_truth;
  h.trajectory = scene.future[0];
  return h;
}

HostHypothesis behavior_hypothesis(
  const Scene & scene, dynamics::BehaviorMode mode, std::size_t steps, const dynamics::BehaviorConfig & behavior)
{
  const auto history = dynamics::trajectory_from_positions(scene.past.at(0), scene.dt, behavior.dynamics.limits);
  const auto controls = dynamics::behavior_controls(history, mode, steps, behavior);
  const double t0 = static_cast<double>(history.size() - 1) * scene.dt;
  const auto traj =
    dynamics::rollout(history.back(), controls, behavior.gradient, scene.dt, steps, behavior.dynamics, t0);
  HostHypothesis h;
  h.source = HostSource::behavior_rollout;
  h.behavior = mode;
  h.trajectory.reserve(steps);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    h.trajectory.push_back({traj.states[k].px(), traj.states[k].py()});
  }
  return h;
}

HostHypothesis constant_velocity_hypothesis(const Scene & scene, std::size_t steps)
{
  const auto & past = scene.past.at(0);
  if (past.size() < 2) {
    throw ContractError("constant-velocity extrapolation needs two history frames");
  }
  const Point2 last = past.back();
  const Point2 prev = past[past.size() - 2];
  HostHypothesis h;
  h.source = HostSource::constant_velocity;
  h.trajectory.reserve(steps);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double s = static_cast<double>(k);
    h.trajectory.push_back({last.x + s * (last.x - prev.x), last.y + s * (last.y - prev.y)});
  }
  return h;
}

HostHypothesis evaluation_hypothesis(
  const Scene & scene, dynamics::BehaviorMode mode, const ModelConfig & config,
  const dynamics::BehaviorConfig & behavior)
{
  if (config.kinematic) {
    auto h = constant_velocity_hypothesis(scene, config.horizon);
    h.behavior = mode;
    return h;
  }
  return behavior_hypothesis(scene, mode, config.horizon, behavior);
}

// ---------------------------------------------------------------------------
// Building blocks

Tensor history_matrix(const Scene & scene, double scale)
{
  const std::size_t n = scene.vehicle_count(), t = scene.history_length();
  Tensor x = Tensor::zeros(n, 2 * t);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < t; ++k) {
      x(v, 2 * k) = scale * scene.past[v][k].x;
      x(v, 2 * k + 1) = scale * scene.past[v][k].y;
    }
  }
  return x;
}

Tensor trajectory_row(const std::vector<Point2> & trajectory, double scale)
{
  Tensor x = Tensor::zeros(1, 2 * trajectory.size());
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    x(0, 2 * k) = scale * trajectory[k].x;
    x(0, 2 * k + 1) = scale * trajectory[k].y;
  }
  return x;
}

Var embed_history(const Weights & w, Var history, const ModelConfig & config)
{
  if (history.value().cols() != 2 * config.history) {
    std::ostringstream os;
    os << "history window has " << history.value().cols() / 2 << " frames, model expects " << config.history;
    throw ContractError(os.str());
  }
  return perceptron(w, "history", history);
}

Var embed_host(
  Tape & tape, const Weights & w, const HostHypothesis & host, Phase phase, const ModelConfig & config,
  bool strict)
{
  if (host.trajectory.size() != config.horizon) {
    std::ostringstream os;
    os << "host trajectory has " << host.trajectory.size() << " frames, model expects " << config.horizon;
    throw ContractError(os.str());
  }
  if (strict) {
    if (phase == Phase::train && host.source != HostSource::ground_truth) {
      throw ContractError("training embeds the ground-truth host trajectory");
    }
    if (phase == Phase::eval && host.source == HostSource::ground_truth) {
      throw ContractError("evaluation must not see the ground-truth host trajectory");
    }
  }
  return perceptron(w, "host", tape.constant(trajectory_row(host.trajectory, config.input_scale)));
}

SceneTopology infer_scene_topology(const Tensor & nodes, const ModelConfig & config)
{
  SceneTopology t;
  t.affinity = hg::cosine_affinity(nodes);
  t.topology = hg::infer_topology(t.affinity, config.tau);
  t.groups = config.gnn ? hg::pairwise_groups(t.topology) : hg::groups_from_topology(t.topology);
  return t;
}

Var init_hyperedge_features(Tape & tape, Var nodes, const hg::HyperedgeGroups & groups)
{
  if (groups.edge_count() == 0) {
    throw ContractError("hyperedge features need at least one hyperedge");
  }
  return nx::linear(tape.constant(hg::edge_from_vertex_mean(groups)), nodes);
}

LayerOutput transformer_layer(
  Tape & tape, const Weights & w, std::size_t layer, Var nodes, Var edges, const hg::HyperedgeGroups & groups,
  const ModelConfig & config)
{
  const std::string p = layer_prefix(layer);
  const bool has_edges = edges.valid();
  Var incident;
  if (has_edges) {
    incident = nx::linear(tape.constant(hg::vertex_from_edge_mean(groups)), edges);
  }
  auto project = [&](const std::string & name) {
    Var r = nx::linear(nodes, weight(w, p + "." + name + "_node.weight"));
    if (has_edges) {
      r = nx::add(r, nx::linear(incident, weight(w, p + "." + name + "_edge.weight")));
    }
    return r;
  };
  const Var q = project("query");
  const Var k = project("key");
  const Var v = project("value");

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config.node_dim));
  const auto mask = hg::co_membership_mask(groups);
  const Var alpha = nx::masked_softmax_rows(nx::scale(nx::linear(q, nx::transpose(k)), inv_sqrt_d), mask);
  const Var mixed = nx::linear(alpha, v);
  const Var ffn = perceptron(w, p + ".ffn", mixed);
  const Var next_nodes = nx::layer_norm_rows(
    nx::add(nodes, ffn), weight(w, p + ".node_norm.gamma"), weight(w, p + ".node_norm.beta"));

  LayerOutput out;
  out.nodes = next_nodes;
  out.attention = alpha.value();
  if (has_edges) {
    const Var member_mean = nx::linear(tape.constant(hg::edge_from_vertex_mean(groups)), next_nodes);
    const Var parts[] = {edges, member_mean};
    const Var message = nx::relu(nx::linear(nx::concat_cols(parts), weight(w, p + ".message.weight")));
    const Var update = nx::linear(message, weight(w, p + ".edge_update.weight"), weight(w, p + ".edge_update.bias"));
    out.edges = nx::layer_norm_rows(
      nx::add(edges, update), weight(w, p + ".edge_norm.gamma"), weight(w, p + ".edge_norm.beta"));
  }
  return out;
}

DecodedModes decode_modes(
  Tape & tape, const Weights & w, Var final_nodes, Var initial_nodes, Var host_embedding,
  const std::vector<Point2> & last_positions, const ModelConfig & config)
{
  const std::size_t n = final_nodes.value().rows();
  const std::size_t a = n - 1;
  if (a == 0 || last_positions.size() != a) {
    throw ContractError("decoder needs one last position per ambient vehicle");
  }
  const std::size_t m_count = config.mode_count();
  if (m_count == 0) {
    throw ConfigError("decoder needs at least one mode");
  }
  const std::size_t tp = config.horizon;

  const Var ones = tape.constant(Tensor::filled(n, 1, 1.0));
  const Var parts[] = {final_nodes, initial_nodes, nx::linear(ones, host_embedding)};
  const Var input = nx::slice_rows(nx::concat_cols(parts), 1, n);

  Tensor base = Tensor::zeros(a, 2 * tp);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t k = 0; k < tp; ++k) {
      base(i, 2 * k) = last_positions[i].x;
      base(i, 2 * k + 1) = last_positions[i].y;
    }
  }
  const Var base_var = tape.constant(std::move(base));
  const Var accumulate = tape.constant(cumulative_operator(tp));
  const double unscale = 1.0 / config.input_scale;

  DecodedModes out;
  std::vector<Var> logits;
  for (std::size_t m = 0; m < m_count; ++m) {
    const Var head = perceptron(w, decoder_prefix(m), input);
    const Var offsets = nx::slice_cols(head, 0, 2 * tp);
    out.positions.push_back(nx::add(nx::scale(nx::linear(offsets, accumulate), unscale), base_var));
    logits.push_back(nx::slice_cols(head, 2 * tp, 2 * tp + 1));
  }
  out.logits = logits.size() == 1 ? logits.front() : nx::concat_cols(logits);
  out.probabilities = nx::softmax_rows(out.logits);
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

std::map<std::string, std::vector<std::size_t>> parameter_shapes(const ModelConfig & config)
{
  config.validate();
  const std::size_t d = config.node_dim, f = config.ffn_width();
  std::map<std::string, std::vector<std::size_t>> s;
  auto mlp = [&](const std::string & p, std::size_t in, std::size_t hidden, std::size_t out) {
    s[p + ".fc1.weight"] = {in, hidden};
    s[p + ".fc1.bias"] = {hidden};
    s[p + ".fc2.weight"] = {hidden, out};
    s[p + ".fc2.bias"] = {out};
  };
  mlp("history", 2 * config.history, d, d);
  mlp("host", 2 * config.horizon, d, d);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto p = layer_prefix(l);
    for (const char * name : {"query", "key", "value"}) {
      s[p + "." + name + "_node.weight"] = {d, d};
      s[p + "." + name + "_edge.weight"] = {d, d};
    }
    mlp(p + ".ffn", d, f, d);
    s[p + ".node_norm.gamma"] = {d};
    s[p + ".node_norm.beta"] = {d};
    s[p + ".message.weight"] = {2 * d, d};
    s[p + ".edge_update.weight"] = {d, d};
    s[p + ".edge_update.bias"] = {d};
    s[p + ".edge_norm.gamma"] = {d};
    s[p + ".edge_norm.beta"] = {d};
  }
  for (std::size_t m = 0; m < config.mode_count(); ++m) {
    mlp(decoder_prefix(m), 3 * d, 2 * d, 2 * config.horizon + 1);
  }
  return s;
}

numerics::ParameterStore init_parameters(const ModelConfig & config, std::uint64_t seed)
{
  const auto shapes = parameter_shapes(config);
  std::mt19937_64 rng(seed);
  nx::ParameterStore store;
  auto ends_with = [](const std::string & s, const std::string & tail) {
    return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
  };
  for (const auto & [name, shape] : shapes) {
    if (ends_with(name, ".gamma")) {
      store.set(name, Tensor(shape, std::vector<double>(shape[0], 1.0)));
    } else if (ends_with(name, ".beta")) {
      store.set(name, Tensor(shape));
    } else if (ends_with(name, ".weight")) {
      store.set(name, nx::uniform_init(shape[0], shape[1], rng));
    } else {
      const auto stem = name.substr(0, name.size() - std::string(".bias").size());
      store.set(name, nx::uniform_bias(shapes.at(stem + ".weight")[0], shape[0], rng));
    }
  }
  // Confidence logits start equal.
  const std::size_t logit_col = 2 * config.horizon;
  for (std::size_t m = 0; m < config.mode_count(); ++m) {
    auto & w2 = store.get(decoder_prefix(m) + ".fc2.weight");
    for (std::size_t r = 0; r < w2.rows(); ++r) {
      w2(r, logit_col) = 0.0;
    }
    store.get(decoder_prefix(m) + ".fc2.bias")[logit_col] = 0.0;
  }
  return store;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config), params_(init_parameters(config, seed)) {}

Model::Model(ModelConfig config, numerics::ParameterStore params) : config_(config), params_(std::move(params))
{
  const auto shapes = parameter_shapes(config_);
  if (shapes.size() != params_.size()) {
    std::ostringstream os;
    os << "checkpoint holds " << params_.size() << " tensors, configuration needs " << shapes.size();
    throw ConfigError(os.str());
  }
  for (const auto & [name, shape] : shapes) {
    if (!params_.contains(name)) {
      throw ConfigError("checkpoint lacks parameter '" + name + "'");
    }
    if (params_.get(name).shape() != shape) {
      throw ConfigError("parameter '" + name + "' has shape " + params_.get(name).shape_string());
    }
  }
}

ForwardGraph Model::forward(
  Tape & tape, const Weights & w, const Scene & scene, const HostHypothesis & host, Phase phase) const
{
  check_scene(scene);
  ForwardGraph g;
  const Var history = tape.constant(history_matrix(scene, config_.input_scale));
  g.initial_nodes = embed_history(w, history, config_);
  g.topology = infer_scene_topology(g.initial_nodes.value(), config_);
  g.host_embedding = embed_host(tape, w, host, phase, config_);

  Var nodes = g.initial_nodes;
  Var edges;
  if (g.topology.groups.edge_count() > 0) {
    edges = init_hyperedge_features(tape, nodes, g.topology.groups);
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    auto out = transformer_layer(tape, w, l, nodes, edges, g.topology.groups, config_);
    nodes = out.nodes;
    edges = out.edges;
    g.attention.push_back(std::move(out.attention));
  }
  g.nodes = nodes;
  g.edges = edges;

  if (scene.ambient_count() > 0) {
    std::vector<Point2> last;
    for (std::size_t v = 1; v < scene.vehicle_count(); ++v) {
      last.push_back(scene.past[v].back());
    }
    auto decoded = decode_modes(tape, w, g.nodes, g.initial_nodes, g.host_embedding, last, config_);
    g.mode_positions = std::move(decoded.positions);
    g.logits = decoded.logits;
    g.probabilities = decoded.probabilities;
  }
  return g;
}

Prediction Model::predict(const Scene & scene, const HostHypothesis & host, Phase phase) const
{
  Tape tape;
  Weights w;
  for (const auto & [name, value] : params_.entries()) {
    w.emplace(name, tape.constant(value));
  }
  auto g = forward(tape, w, scene, host, phase);
  Prediction p;
  p.topology = std::move(g.topology);
  p.attention = std::move(g.attention);
  const std::size_t a = scene.ambient_count();
  const std::size_t tp = config_.horizon;
  for (std::size_t i = 0; i < a; ++i) {
    ModeSet ms;
    ms.vehicle_id = scene.ambient_ids[i];
    for (std::size_t m = 0; m < g.mode_positions.size(); ++m) {
      const auto & pos = g.mode_positions[m].value();
      std::vector<Point2> traj(tp);
      for (std::size_t k = 0; k < tp; ++k) {
        traj[k] = {pos(i, 2 * k), pos(i, 2 * k + 1)};
      }
      ms.trajectories.push_back(std::move(traj));
      ms.probabilities.push_back(g.probabilities.value()(i, m));
    }
    p.ambient.push_back(std::move(ms));
  }
  return p;
}

std::string sidecar_path(const std::string & checkpoint_path)
{
  const std::string ext = ".json";
  if (checkpoint_path.size() > ext.size() &&
      checkpoint_path.compare(checkpoint_path.size() - ext.size(), ext.size(), ext) == 0) {
    return checkpoint_path.substr(0, checkpoint_path.size() - ext.size()) + ".hparams.json";
  }
  return checkpoint_path + ".hparams.json";
}

void Model::save(const std::string & checkpoint_path) const
{
  nx::save_checkpoint(params_, checkpoint_path);
  ordered_json doc;
  doc["format"] = "hfttc-model";
  doc["version"] = 1;
  doc["config"] = config_.to_json();
  std::ofstream out(sidecar_path(checkpoint_path), std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write '" + sidecar_path(checkpoint_path) + "'");
  }
  out << doc.dump(2) << '\n';
}

Model Model::load(const std::string & checkpoint_path, const json & expected)
{
  if (!std::ifstream(checkpoint_path, std::ios::binary)) {
    throw DataError("cannot open checkpoint '" + checkpoint_path + "'");
  }
  const auto side = sidecar_path(checkpoint_path);
  std::ifstream in(side, std::ios::binary);
  if (!in) {
    throw ConfigError("hyperparameter sidecar '" + side + "' is missing");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception & e) {
    throw ConfigError("hyperparameter sidecar '" + side + "' is malformed: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "hfttc-model" || !doc.contains("config")) {
    throw ConfigError("'" + side + "' is not a model sidecar");
  }
  const auto config = ModelConfig::from_json(doc["config"]);
  if (!expected.is_object()) {
    throw ConfigError("expected hyperparameters must be a JSON object");
  }
  const json have = config.to_json();
  for (const auto & [key, value] : expected.items()) {
    if (!have.contains(key)) {
      config_error("unknown key '" + key + "'");
    }
    if (have[key] != value) {
      throw ConfigError(
        "checkpoint was trained with " + key + " = " + have[key].dump() + ", requested " + value.dump());
    }
  }
  return Model(config, nx::load_checkpoint(checkpoint_path));
}

}  // namespace hfttc::model
