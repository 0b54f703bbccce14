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

#ifndef HFTTC__CORE__SYNTHETIC_HPP_
#define HFTTC__CORE__SYNTHETIC_HPP_

#include "hfttc/core/dataset.hpp"
#include "hfttc/core/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace hfttc::synthetic
{

/// One scripted maneuver.
///   cruise       zero controls
///   accel        {a}: constant acceleration
///   brake_ramp   {decel, ramp}: acceleration ramps linearly from 0 to -decel
///                over `ramp` seconds, then holds
///   turn         {yaw_rate}: constant yaw rate
///   lane_change  {yaw_rate}: +yaw_rate for the first half, -yaw_rate for the
///                second half
struct Segment
{
  std::string kind = "cruise";
  std::map<std::string, double> params;
  double duration = 0.0;
};

struct VehicleScript
{
  std::int64_t id = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double psi0 = 0.0;
  double v0 = 0.0;
  /// Played back to back from t = 0; cruise afterwards.
  std::vector<Segment> script;
};

struct ScenarioSpec
{
  std::string name = "scenario";
  double dt = 0.1;
  std::size_t history = 30;
  std::size_t horizon = 50;
  std::int64_t host = 0;
  /// Extra simulated time [s] after the first window, for snapshot series.
  double window = 0.0;
  std::vector<VehicleScript> vehicles;

  /// Throws ConfigError on unknown kinds, bad parameters, negative initial
  /// speed, duplicated ids or a missing host.
  void validate() const;
  /// {name, dt, history, horizon, host, window, vehicles: [{id, x0, y0, psi0,
  /// v0, script: [{kind, params, duration}]}]}. Unknown keys rejected.
  static ScenarioSpec from_json(const nlohmann::json & doc);
  nlohmann::ordered_json to_json() const;
};

/// Control applied by a script at time t.
dynamics::ControlInput script_control(const VehicleScript & vehicle, double t);

/// Rolls every vehicle out over the full window plus `window` seconds.
/// ConfigError when a script would drive a speed below zero.
data::Recording simulate(const ScenarioSpec & spec, const dynamics::DynamicsConfig & dynamics = {});

/// Scene whose last history frame is frame history - 1 + offset_frames; all
/// vehicles are ambient.
Scene scene_from_recording(const ScenarioSpec & spec, const data::Recording & recording, std::size_t offset_frames = 0);

/// First window of the scripted scenario.
Scene synth_scenario(const ScenarioSpec & spec, const dynamics::DynamicsConfig & dynamics = {});

/// Scenes anchored every `interval` seconds across [0, spec.window].
std::vector<Scene> snapshot_series(const ScenarioSpec & spec, double interval = 1.0,
  const dynamics::DynamicsConfig & dynamics = {});

struct CorpusConfig
{
  std::size_t scenes = 200;
  std::uint64_t seed = 0;
  std::size_t history = 30;
  std::size_t horizon = 50;
  double dt = 0.1;
};

struct Corpus
{
  std::vector<ScenarioSpec> specs;
  std::vector<data::Recording> recordings;
  std::vector<Scene> scenes;
};

/// Randomized braking platoons and lane changes, one recording and one scene
/// per scenario. Reactions to the lead maneuver start after a delay, so the
/// futures depend on what the neighbors did in the history.
ScenarioSpec platoon_spec(std::mt19937_64 & rng, const CorpusConfig & config, std::size_t index);
ScenarioSpec lane_change_spec(std::mt19937_64 & rng, const CorpusConfig & config, std::size_t index);
Corpus interacting_corpus(const CorpusConfig & config);

}  // namespace hfttc::synthetic

#endif  // HFTTC__CORE__SYNTHETIC_HPP_
