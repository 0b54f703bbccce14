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

#include "hfttc/core/synthetic.hpp"

#include "hfttc/core/errors.hpp"
#include "hfttc/core/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace hfttc::synthetic
{

namespace
{

const std::map<std::string, std::vector<std::string>> & kind_params()
{
  static const std::map<std::string, std::vector<std::string>> table{
    {"cruise", {}},
    {"accel", {"a"}},
    {"brake_ramp", {"decel", "ramp"}},
    {"turn", {"yaw_rate"}},
    {"lane_change", {"yaw_rate"}},
  };
  return table;
}

template <typename T>
T field(const nlohmann::json & obj, const char * key, const std::string & where)
{
  if (!obj.contains(key)) {
    throw ConfigError(where + ": missing '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError(where + ": '" + key + "' has the wrong type");
  }
}

void reject_unknown(const nlohmann::json & obj, std::initializer_list<const char *> allowed, const std::string & where)
{
  if (!obj.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  for (const auto & [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char * a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double uniform(std::mt19937_64 & rng, double lo, double hi) { return lo + (hi - lo) * numerics::uniform01(rng); }

std::size_t total_frames(const ScenarioSpec & spec)
{
  const auto extra = static_cast<std::size_t>(std::llround(spec.window / spec.dt));
  return spec.history + spec.horizon + extra;
}

}  // namespace

void ScenarioSpec::validate() const
{
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("scenario time step must be positive");
  }
  if (history < 3 || horizon < 1) {
    throw ConfigError("scenario needs at least 3 history frames and 1 future frame");
  }
  if (!(window >= 0.0) || !std::isfinite(window)) {
    throw ConfigError("scenario window must be non-negative");
  }
  std::set<std::int64_t> ids;
  for (const auto & v : vehicles) {
    if (!ids.insert(v.id).second) {
      throw ConfigError("duplicated vehicle id " + std::to_string(v.id));
    }
    for (double x : {v.x0, v.y0, v.psi0, v.v0}) {
      if (!std::isfinite(x)) {
        throw ConfigError("vehicle " + std::to_string(v.id) + ": non-finite initial state");
      }
    }
    if (v.v0 < 0.0) {
      throw ConfigError("vehicle " + std::to_string(v.id) + ": negative initial speed");
    }
    for (const auto & seg : v.script) {
      const auto it = kind_params().find(seg.kind);
      if (it == kind_params().end()) {
        throw ConfigError("vehicle " + std::to_string(v.id) + ": unknown maneuver '" + seg.kind + "'");
      }
      if (!(seg.duration >= 0.0) || !std::isfinite(seg.duration)) {
        throw ConfigError("vehicle " + std::to_string(v.id) + ": maneuver duration must be non-negative");
      }
      for (const auto & name : it->second) {
        const auto p = seg.params.find(name);
        if (p == seg.params.end() || !std::isfinite(p->second)) {
          throw ConfigError("vehicle " + std::to_string(v.id) + ": '" + seg.kind + "' needs parameter '" + name + "'");
        }
      }
      for (const auto & [name, value] : seg.params) {
        if (std::find(it->second.begin(), it->second.end(), name) == it->second.end()) {
          throw ConfigError("vehicle " + std::to_string(v.id) + ": '" + seg.kind + "' has no parameter '" + name + "'");
        }
      }
      if (seg.kind == "brake_ramp" && (seg.params.at("decel") < 0.0 || seg.params.at("ramp") < 0.0)) {
        throw ConfigError("vehicle " + std::to_string(v.id) + ": brake_ramp needs non-negative decel and ramp");
      }
    }
  }
  if (!ids.count(host)) {
    throw ConfigError("host " + std::to_string(host) + " is not among the scenario vehicles");
  }
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json & doc)
{
  reject_unknown(doc, {"name", "dt", "history", "horizon", "host", "window", "vehicles"}, "scenario");
  ScenarioSpec s;
  if (doc.contains("name")) {
    s.name = field<std::string>(doc, "name", "scenario");
  }
  if (doc.contains("dt")) {
    s.dt = field<double>(doc, "dt", "scenario");
  }
  if (doc.contains("history")) {
    s.history = field<std::size_t>(doc, "history", "scenario");
  }
  if (doc.contains("horizon")) {
    s.horizon = field<std::size_t>(doc, "horizon", "scenario");
  }
  if (doc.contains("window")) {
    s.window = field<double>(doc, "window", "scenario");
  }
  s.host = field<std::int64_t>(doc, "host", "scenario");
  const auto & vehicles = doc.contains("vehicles") ? doc.at("vehicles") : nlohmann::json::array();
  if (!vehicles.is_array()) {
    throw ConfigError("scenario: 'vehicles' must be an array");
  }
  for (const auto & v : vehicles) {
    reject_unknown(v, {"id", "x0", "y0", "psi0", "v0", "script"}, "vehicle");
    VehicleScript vs;
    vs.id = field<std::int64_t>(v, "id", "vehicle");
    const std::string where = "vehicle " + std::to_string(vs.id);
    vs.x0 = field<double>(v, "x0", where);
    vs.y0 = field<double>(v, "y0", where);
    vs.psi0 = v.contains("psi0") ? field<double>(v, "psi0", where) : 0.0;
    vs.v0 = field<double>(v, "v0", where);
    if (v.contains("script")) {
      if (!v.at("script").is_array()) {
        throw ConfigError(where + ": 'script' must be an array");
      }
      for (const auto & seg : v.at("script")) {
        reject_unknown(seg, {"kind", "params", "duration"}, where + " maneuver");
        Segment sg;
        sg.kind = field<std::string>(seg, "kind", where);
        sg.duration = field<double>(seg, "duration", where);
        if (seg.contains("params")) {
          if (!seg.at("params").is_object()) {
            throw ConfigError(where + ": maneuver params must be an object");
          }
          for (const auto & [key, value] : seg.at("params").items()) {
            if (!value.is_number()) {
              throw ConfigError(where + ": parameter '" + key + "' must be a number");
            }
            sg.params[key] = value.get<double>();
          }
        }
        vs.script.push_back(std::move(sg));
      }
    }
    s.vehicles.push_back(std::move(vs));
  }
  s.validate();
  return s;
}

nlohmann::ordered_json ScenarioSpec::to_json() const
{
  nlohmann::ordered_json doc;
  doc["name"] = name;
  doc["dt"] = dt;
  doc["history"] = history;
  doc["horizon"] = horizon;
  doc["host"] = host;
  doc["window"] = window;
  auto arr = nlohmann::ordered_json::array();
  for (const auto & v : vehicles) {
    nlohmann::ordered_json j;
    j["id"] = v.id;
    j["x0"] = v.x0;
    j["y0"] = v.y0;
    j["psi0"] = v.psi0;
    j["v0"] = v.v0;
    auto script = nlohmann::ordered_json::array();
    for (const auto & seg : v.script) {
      nlohmann::ordered_json p = nlohmann::ordered_json::object();
      for (const auto & [k, x] : seg.params) {
        p[k] = x;
      }
      script.push_back({{"kind", seg.kind}, {"params", p}, {"duration", seg.duration}});
    }
    j["script"] = std::move(script);
    arr.push_back(std::move(j));
  }
  doc["vehicles"] = std::move(arr);
  return doc;
}

dynamics::ControlInput script_control(const VehicleScript & vehicle, double t)
{
  double start = 0.0;
  for (const auto & seg : vehicle.script) {
    const double end = start + seg.duration;
    if (t < end) {
      const double tau = t - start;
      if (seg.kind == "accel") {
        return {seg.params.at("a"), 0.0};
      }
      if (seg.kind == "brake_ramp") {
        const double ramp = seg.params.at("ramp");
        const double frac = ramp > 0.0 ? std::min(tau / ramp, 1.0) : 1.0;
        return {-seg.params.at("decel") * frac, 0.0};
      }
      if (seg.kind == "turn") {
        return {0.0, seg.params.at("yaw_rate")};
      }
      if (seg.kind == "lane_change") {
        const double w = seg.params.at("yaw_rate");
        return {0.0, tau < 0.5 * seg.duration ? w : -w};
      }
      return {};
    }
    start = end;
  }
  return {};
}

data::Recording simulate(const ScenarioSpec & spec, const dynamics::DynamicsConfig & dynamics)
{
  spec.validate();
  const std::size_t frames = total_frames(spec);
  data::Recording rec;
  rec.name = spec.name;
  rec.dt = spec.dt;
  const dynamics::GradientProfile flat;
  const double edge = 1e-9 * spec.dt;
  for (const auto & v : spec.vehicles) {
    dynamics::VehicleState s(v.x0, v.y0, v.psi0, v.v0);
    for (std::size_t k = 0; k < frames; ++k) {
      const double t = static_cast<double>(k) * spec.dt;
      rec.records.push_back({v.id, static_cast<std::int64_t>(k), t, s.px(), s.py(), std::nullopt});
      if (k + 1 == frames) {
        break;
      }
      // One-sided limits inside the step keep step-aligned segment switches exact.
      const dynamics::ControlSchedule schedule = [&](double tq) {
        return script_control(v, std::clamp(tq, t + edge, t + spec.dt - edge));
      };
      const auto step = dynamics::rk4_step(s, schedule, flat, t, spec.dt, dynamics);
      if (step.speed_clamped) {
        throw ConfigError("scenario '" + spec.name + "': vehicle " + std::to_string(v.id) +
          " would reach a negative speed at t = " + std::to_string(t + spec.dt) + " s");
      }
      s = step.state;
    }
  }
  std::stable_sort(rec.records.begin(), rec.records.end(), [](const auto & a, const auto & b) {
    return a.frame != b.frame ? a.frame < b.frame : a.vehicle_id < b.vehicle_id;
  });
  return rec;
}

Scene scene_from_recording(const ScenarioSpec & spec, const data::Recording & recording, std::size_t offset_frames)
{
  data::WindowConfig wc;
  wc.history = spec.history;
  wc.horizon = spec.horizon;
  wc.stride = 1;
  wc.radius = std::numeric_limits<double>::infinity();
  wc.max_ambient = spec.vehicles.size();
  const auto anchor = static_cast<std::int64_t>(spec.history - 1 + offset_frames);
  auto scene = data::scene_at(recording, recording.tracks(), spec.host, anchor, wc);
  if (!scene) {
    throw ConfigError("scenario '" + spec.name + "' does not cover the requested window");
  }
  return *scene;
}

Scene synth_scenario(const ScenarioSpec & spec, const dynamics::DynamicsConfig & dynamics)
{
  return scene_from_recording(spec, simulate(spec, dynamics));
}

std::vector<Scene> snapshot_series(const ScenarioSpec & spec, double interval, const dynamics::DynamicsConfig & dynamics)
{
  if (!(interval > 0.0)) {
    throw ConfigError("snapshot interval must be positive");
  }
  const auto rec = simulate(spec, dynamics);
  const auto stride = static_cast<std::size_t>(std::llround(interval / spec.dt));
  const auto extra = static_cast<std::size_t>(std::llround(spec.window / spec.dt));
  std::vector<Scene> out;
  for (std::size_t off = 0; off <= extra; off += std::max<std::size_t>(stride, 1)) {
    out.push_back(scene_from_recording(spec, rec, off));
  }
  return out;
}

ScenarioSpec platoon_spec(std::mt19937_64 & rng, const CorpusConfig & config, std::size_t index)
{
  ScenarioSpec s;
  s.name = "platoon_" + std::to_string(index);
  s.dt = config.dt;
  s.history = config.history;
  s.horizon = config.horizon;
  const double t_now = static_cast<double>(config.history - 1) * config.dt;
  const std::size_t members = 3 + static_cast<std::size_t>(numerics::uniform01(rng) * 2.0);
  const double speed = uniform(rng, 14.0, 24.0);
  const double brake_at = t_now - uniform(rng, 0.3, 1.5);
  const double delay = uniform(rng, 0.5, 1.0);
  double x = 0.0;
  for (std::size_t i = 0; i < members; ++i) {
    VehicleScript v;
    v.id = static_cast<std::int64_t>(i + 1);
    v.x0 = x;
    v.y0 = uniform(rng, -0.2, 0.2);
    v.v0 = speed + uniform(rng, -0.5, 0.5);
    const double start = brake_at + static_cast<double>(i) * delay;
    const double decel = uniform(rng, 2.0, 4.0);
    const double hold = std::min(uniform(rng, 2.0, 4.0), 0.85 * v.v0 / decel);
    v.script.push_back({"cruise", {}, start});
    v.script.push_back({"brake_ramp", {{"decel", decel}, {"ramp", uniform(rng, 0.3, 0.8)}}, hold});
    s.vehicles.push_back(std::move(v));
    x -= uniform(rng, 14.0, 22.0);
  }
  // Adjacent-lane traffic unaffected by the platoon.
  const std::size_t others = 1 + static_cast<std::size_t>(numerics::uniform01(rng) * 2.0);
  for (std::size_t i = 0; i < others; ++i) {
    VehicleScript v;
    v.id = static_cast<std::int64_t>(members + i + 1);
    v.x0 = uniform(rng, x, 20.0);
    v.y0 = 3.5 + uniform(rng, -0.2, 0.2);
    v.v0 = uniform(rng, 15.0, 25.0);
    s.vehicles.push_back(std::move(v));
  }
  // Host: the last platoon member, so the braking wave is ahead of it.
  s.host = static_cast<std::int64_t>(members);
  return s;
}

ScenarioSpec lane_change_spec(std::mt19937_64 & rng, const CorpusConfig & config, std::size_t index)
{
  ScenarioSpec s;
  s.name = "lane_change_" + std::to_string(index);
  s.dt = config.dt;
  s.history = config.history;
  s.horizon = config.horizon;
  const double t_now = static_cast<double>(config.history - 1) * config.dt;
  const double lane = 3.5;
  const double speed = uniform(rng, 15.0, 24.0);
  const double duration = uniform(rng, 3.0, 4.5);
  const double half = 0.5 * duration;
  const double sign = numerics::uniform01(rng) < 0.5 ? 1.0 : -1.0;
  // Lateral shift of an ω pulse pair at speed v is about v ω half^2.
  const double yaw = sign * lane / (speed * half * half);
  const double start = t_now - uniform(rng, 0.4, 1.4);

  VehicleScript changer;
  changer.id = 1;
  changer.x0 = uniform(rng, 10.0, 25.0);
  changer.y0 = -sign * lane;
  changer.v0 = speed;
  changer.script.push_back({"cruise", {}, start});
  changer.script.push_back({"lane_change", {{"yaw_rate", yaw}}, duration});
  s.vehicles.push_back(changer);

  // Host in the target lane behind the changer yields after a delay.
  VehicleScript host;
  host.id = 2;
  host.x0 = 0.0;
  host.y0 = 0.0;
  host.v0 = speed + uniform(rng, 0.0, 2.0);
  const double yield_at = start + uniform(rng, 0.5, 1.0);
  const double decel = uniform(rng, 1.0, 2.5);
  host.script.push_back({"cruise", {}, yield_at});
  host.script.push_back({"brake_ramp", {{"decel", decel}, {"ramp", 0.5}}, std::min(2.0, 0.8 * host.v0 / decel)});
  s.vehicles.push_back(host);

  // A follower in the target lane reacts to the host with a further delay.
  VehicleScript follower;
  follower.id = 3;
  follower.x0 = -uniform(rng, 15.0, 22.0);
  follower.y0 = 0.0;
  follower.v0 = host.v0 + uniform(rng, -0.5, 0.5);
  const double react = yield_at + uniform(rng, 0.6, 1.0);
  const double d2 = uniform(rng, 1.0, 2.5);
  follower.script.push_back({"cruise", {}, react});
  follower.script.push_back({"brake_ramp", {{"decel", d2}, {"ramp", 0.5}}, std::min(2.0, 0.8 * follower.v0 / d2)});
  s.vehicles.push_back(follower);

  // Unrelated vehicle in the origin lane.
  VehicleScript other;
  other.id = 4;
  other.x0 = uniform(rng, -30.0, 30.0);
  other.y0 = -sign * lane;
  other.v0 = uniform(rng, 15.0, 25.0);
  s.vehicles.push_back(other);

  s.host = 2;
  return s;
}

Corpus interacting_corpus(const CorpusConfig & config)
{
  std::mt19937_64 rng(config.seed);
  Corpus c;
  for (std::size_t i = 0; i < config.scenes; ++i) {
    auto spec = i % 2 == 0 ? platoon_spec(rng, config, i) : lane_change_spec(rng, config, i);
    auto rec = simulate(spec);
    c.scenes.push_back(scene_from_recording(spec, rec));
    c.specs.push_back(std::move(spec));
    c.recordings.push_back(std::move(rec));
  }
  return c;
}

}  // namespace hfttc::synthetic
