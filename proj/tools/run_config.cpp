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

#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

namespace hfttc::cli
{

namespace
{

using json = nlohmann::json;

template <typename T>
std::optional<T> read_value(const json & v, const std::string & key)
{
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_same_v<T, std::string>) {
    ok = v.is_string();
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else {
    ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }
  if (!ok) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
  return v.get<T>();
}

template <typename T>
void pick(std::optional<T> & dst, const std::optional<T> & flag, const std::optional<T> & file)
{
  dst = flag ? flag : file;
}

}  // namespace

RunOptions options_from_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw UsageError("config file '" + path + "' must hold a JSON object");
  }

  RunOptions o;
  const std::map<std::string, std::function<void(const json &, const std::string &)>> setters = {
    {"subcommand", [&](const json & v, const std::string & k) { o.subcommand = read_value<std::string>(v, k); }},
    {"data", [&](const json & v, const std::string & k) { o.data = read_value<std::string>(v, k); }},
    {"checkpoint", [&](const json & v, const std::string & k) { o.checkpoint = read_value<std::string>(v, k); }},
    {"out", [&](const json & v, const std::string & k) { o.out = read_value<std::string>(v, k); }},
    {"seed", [&](const json & v, const std::string & k) { o.seed = read_value<std::uint64_t>(v, k); }},
    {"tau", [&](const json & v, const std::string & k) { o.tau = read_value<double>(v, k); }},
    {"modes", [&](const json & v, const std::string & k) { o.modes = read_value<std::size_t>(v, k); }},
    {"node_dim", [&](const json & v, const std::string & k) { o.node_dim = read_value<std::size_t>(v, k); }},
    {"layers", [&](const json & v, const std::string & k) { o.layers = read_value<std::size_t>(v, k); }},
    {"ffn_hidden", [&](const json & v, const std::string & k) { o.ffn_hidden = read_value<std::size_t>(v, k); }},
    {"history", [&](const json & v, const std::string & k) { o.history = read_value<std::size_t>(v, k); }},
    {"future", [&](const json & v, const std::string & k) { o.future = read_value<std::size_t>(v, k); }},
    {"lambda", [&](const json & v, const std::string & k) { o.lambda = read_value<double>(v, k); }},
    {"lr", [&](const json & v, const std::string & k) { o.lr = read_value<double>(v, k); }},
    {"steps", [&](const json & v, const std::string & k) { o.steps = read_value<std::size_t>(v, k); }},
    {"batch_size", [&](const json & v, const std::string & k) { o.batch_size = read_value<std::size_t>(v, k); }},
    {"behavior", [&](const json & v, const std::string & k) { o.behavior = read_value<std::string>(v, k); }},
    {"ablate",
      [&](const json & v, const std::string & k) {
        std::vector<std::string> tags;
        if (v.is_string()) {
          tags.push_back(v.get<std::string>());
        } else if (v.is_array()) {
          for (const auto & t : v) {
            tags.push_back(*read_value<std::string>(t, k));
          }
        } else {
          throw UsageError("config key 'ablate' must be a string or an array of strings");
        }
        o.ablate = tags;
      }},
    {"rx", [&](const json & v, const std::string & k) { o.rx = read_value<double>(v, k); }},
    {"ry", [&](const json & v, const std::string & k) { o.ry = read_value<double>(v, k); }},
    {"horizon", [&](const json & v, const std::string & k) { o.horizon = read_value<double>(v, k); }},
    {"traditional", [&](const json & v, const std::string & k) { o.traditional = read_value<bool>(v, k); }},
    {"split", [&](const json & v, const std::string & k) { o.split = read_value<std::string>(v, k); }},
    {"train_fraction",
      [&](const json & v, const std::string & k) { o.train_fraction = read_value<double>(v, k); }},
    {"split_seed", [&](const json & v, const std::string & k) { o.split_seed = read_value<std::uint64_t>(v, k); }},
    {"max_scenes", [&](const json & v, const std::string & k) { o.max_scenes = read_value<std::size_t>(v, k); }},
    {"scene", [&](const json & v, const std::string & k) { o.scene = read_value<std::string>(v, k); }},
    {"stride", [&](const json & v, const std::string & k) { o.stride = read_value<std::size_t>(v, k); }},
    {"radius", [&](const json & v, const std::string & k) { o.radius = read_value<double>(v, k); }},
    {"max_ambient", [&](const json & v, const std::string & k) { o.max_ambient = read_value<std::size_t>(v, k); }},
    {"snapshot_interval",
      [&](const json & v, const std::string & k) { o.snapshot_interval = read_value<double>(v, k); }},
  };
  for (const auto & [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw UsageError("config file '" + path + "': unknown key '" + key + "'");
    }
    it->second(value, key);
  }
  return o;
}

RunOptions merge(const RunOptions & f, const RunOptions & c)
{
  RunOptions o;
  pick(o.subcommand, f.subcommand, c.subcommand);
  pick(o.data, f.data, c.data);
  pick(o.checkpoint, f.checkpoint, c.checkpoint);
  pick(o.out, f.out, c.out);
  pick(o.seed, f.seed, c.seed);
  pick(o.tau, f.tau, c.tau);
  pick(o.modes, f.modes, c.modes);
  pick(o.node_dim, f.node_dim, c.node_dim);
  pick(o.layers, f.layers, c.layers);
  pick(o.ffn_hidden, f.ffn_hidden, c.ffn_hidden);
  pick(o.history, f.history, c.history);
  pick(o.future, f.future, c.future);
  pick(o.lambda, f.lambda, c.lambda);
  pick(o.lr, f.lr, c.lr);
  pick(o.steps, f.steps, c.steps);
  pick(o.batch_size, f.batch_size, c.batch_size);
  pick(o.behavior, f.behavior, c.behavior);
  pick(o.ablate, f.ablate, c.ablate);
  pick(o.rx, f.rx, c.rx);
  pick(o.ry, f.ry, c.ry);
  pick(o.horizon, f.horizon, c.horizon);
  pick(o.traditional, f.traditional, c.traditional);
  pick(o.split, f.split, c.split);
  pick(o.train_fraction, f.train_fraction, c.train_fraction);
  pick(o.split_seed, f.split_seed, c.split_seed);
  pick(o.max_scenes, f.max_scenes, c.max_scenes);
  pick(o.scene, f.scene, c.scene);
  pick(o.stride, f.stride, c.stride);
  pick(o.radius, f.radius, c.radius);
  pick(o.max_ambient, f.max_ambient, c.max_ambient);
  pick(o.snapshot_interval, f.snapshot_interval, c.snapshot_interval);
  return o;
}

Ablation parse_ablation(const std::optional<std::vector<std::string>> & tags)
{
  Ablation a;
  if (!tags) {
    return a;
  }
  for (const auto & t : *tags) {
    if (t == "gnn") {
      a.gnn = true;
    } else if (t == "deterministic") {
      a.deterministic = true;
    } else if (t == "kinematic") {
      a.kinematic = true;
    } else {
      throw UsageError("unknown ablation '" + t + "' (expected gnn, deterministic or kinematic)");
    }
  }
  return a;
}

std::string parse_behavior(const std::optional<std::string> & tag)
{
  const std::string t = tag.value_or("all");
  if (t == "all" || t == "last_step" || t == "average" || t == "self_prediction") {
    return t;
  }
  throw UsageError("unknown behavior '" + t + "' (expected last_step, average, self_prediction or all)");
}

std::string output_dir(const RunOptions & o)
{
  if (o.out) {
    return *o.out;
  }
  if (const char * env = std::getenv("HFTTC_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

}  // namespace hfttc::cli
