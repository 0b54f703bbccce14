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

#include "hfttc/core/safety.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hfttc::safety
{

namespace
{

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

bool same_clock(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

dynamics::VehicleState planar_state(Point2 p, Point2 step, double dt)
{
  const double speed = std::hypot(step.x, step.y) / dt;
  const double heading = speed > 0.0 ? std::atan2(step.y, step.x) : 0.0;
  return {p.x, p.y, heading, speed};
}

nlohmann::ordered_json atoms_json(const TtcDistribution & d)
{
  auto out = nlohmann::ordered_json::array();
  for (const auto & a : d.atoms) {
    out.push_back({a.value, a.probability});
  }
  return out;
}

std::vector<TtcAtom> atoms_from_json(const nlohmann::json & arr)
{
  std::vector<TtcAtom> out;
  for (const auto & a : arr) {
    if (!a.is_array() || a.size() != 2) {
      throw DataError("atom must be a [value, probability] pair");
    }
    out.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return out;
}

}  // namespace

void SafetyThresholds::validate() const
{
  if (!positive_finite(rx) || !positive_finite(ry)) {
    throw ConfigError("separation thresholds must be positive");
  }
  if (!positive_finite(horizon) || !positive_finite(dt)) {
    throw ConfigError("horizon and time step must be positive");
  }
  if (steps() == 0) {
    throw ConfigError("horizon shorter than one time step");
  }
}

std::size_t SafetyThresholds::steps() const
{
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

double TtcDistribution::cdf(double t) const
{
  double f = 0.0;
  for (const auto & a : atoms) {
    if (a.value <= t) {
      f += a.probability;
    }
  }
  return f;
}

double TtcDistribution::total_mass() const
{
  double m = no_event_mass;
  for (const auto & a : atoms) {
    m += a.probability;
  }
  return m;
}

std::vector<std::pair<double, double>> TtcDistribution::cdf_samples(double dt, double horizon) const
{
  if (!positive_finite(dt) || !(horizon >= 0.0)) {
    throw DomainError("cdf grid needs a positive step and a non-negative horizon");
  }
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<std::pair<double, double>> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.emplace_back(t, cdf(t));
  }
  return out;
}

std::optional<double> hf_ttc_mode(const Trajectory & host, const Trajectory & ambient, const SafetyThresholds & thr)
{
  thr.validate();
  if (!same_clock(host.dt, thr.dt) || !same_clock(ambient.dt, thr.dt)) {
    throw ContractError("trajectories and thresholds use different time steps");
  }
  const std::size_t n = thr.steps();
  if (host.size() < n + 1 || ambient.size() < n + 1) {
    std::ostringstream os;
    os << "trajectories must cover " << n + 1 << " samples, got " << host.size() << " and " << ambient.size();
    throw ContractError(os.str());
  }
  for (std::size_t k = 1; k <= n; ++k) {
    const auto & h = host.states[k];
    const auto & a = ambient.states[k];
    if (std::abs(h.px() - a.px()) <= thr.rx && std::abs(h.py() - a.py()) <= thr.ry) {
      return static_cast<double>(k) * thr.dt;
    }
  }
  return std::nullopt;
}

Trajectory extend_positions(std::span<const Point2> positions, double dt, std::size_t steps,
  const dynamics::BehaviorConfig & behavior)
{
  if (positions.empty()) {
    throw ContractError("cannot extend an empty trajectory");
  }
  if (!positive_finite(dt)) {
    throw DomainError("time step must be positive");
  }
  const std::size_t used = std::min(positions.size(), steps + 1);
  const auto head = positions.first(used);
  Trajectory traj;
  dynamics::ControlInput u_end{};
  if (used >= 3) {
    const auto est = dynamics::estimate_controls(head, dt, behavior.dynamics.limits);
    traj.dt = dt;
    for (std::size_t k = 0; k < used; ++k) {
      traj.states.push_back(est.state_at(k, head[k]));
    }
    u_end = est.controls.back();
  } else {
    traj.dt = dt;
    const Point2 step = used == 2 ? Point2{head[1].x - head[0].x, head[1].y - head[0].y} : Point2{};
    for (std::size_t k = 0; k < used; ++k) {
      traj.states.push_back(planar_state(head[k], step, dt));
    }
  }
  if (used < steps + 1) {
    const std::size_t missing = steps + 1 - used;
    const double t0 = static_cast<double>(used - 1) * dt;
    auto tail = dynamics::extrapolate_beyond_horizon(
      traj.back(), u_end, behavior.gradient, dt, missing, behavior.dynamics, t0);
    traj.speed_clamps += tail.speed_clamps;
    traj.states.insert(traj.states.end(), tail.states.begin() + 1, tail.states.end());
  }
  return traj;
}

Trajectory mode_trajectory(Point2 last_observed, const std::vector<Point2> & mode, const SafetyThresholds & thr,
  const dynamics::BehaviorConfig & behavior)
{
  std::vector<Point2> pts;
  pts.reserve(mode.size() + 1);
  pts.push_back(last_observed);
  pts.insert(pts.end(), mode.begin(), mode.end());
  return extend_positions(pts, thr.dt, thr.steps(), behavior);
}

TtcPair ttc_distribution(const Trajectory & host, std::span<const Trajectory> modes,
  std::span<const double> probabilities, const SafetyThresholds & thr)
{
  if (modes.size() != probabilities.size() || modes.empty()) {
    throw ContractError("one probability per mode required");
  }
  TtcPair out;
  out.ttc.no_event_mass = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double p = probabilities[m];
    if (!std::isfinite(p) || p < 0.0) {
      throw ContractError("mode probabilities must be finite and non-negative");
    }
    const auto t = hf_ttc_mode(host, modes[m], thr);
    if (!t) {
      out.ttc.no_event_mass += p;
      continue;
    }
    if (p == 0.0) {
      continue;
    }
    auto it = std::find_if(out.ttc.atoms.begin(), out.ttc.atoms.end(), [&](const TtcAtom & a) { return a.value == *t; });
    if (it == out.ttc.atoms.end()) {
      out.ttc.atoms.push_back({*t, p});
    } else {
      it->probability += p;
    }
  }
  std::sort(out.ttc.atoms.begin(), out.ttc.atoms.end(), [](const TtcAtom & a, const TtcAtom & b) { return a.value < b.value; });
  out.ittc.no_event_mass = out.ttc.no_event_mass;
  for (auto it = out.ttc.atoms.rbegin(); it != out.ttc.atoms.rend(); ++it) {
    out.ittc.atoms.push_back({1.0 / it->value, it->probability});
  }
  return out;
}

TtcPair ttc_distribution(const Trajectory & host, Point2 ambient_last, const ModeSet & modes,
  const SafetyThresholds & thr, const dynamics::BehaviorConfig & behavior)
{
  if (modes.trajectories.size() != modes.probabilities.size()) {
    throw ContractError("mode set has mismatched trajectories and probabilities");
  }
  std::vector<Trajectory> trajs;
  trajs.reserve(modes.trajectories.size());
  for (const auto & m : modes.trajectories) {
    trajs.push_back(mode_trajectory(ambient_last, m, thr, behavior));
  }
  return ttc_distribution(host, trajs, modes.probabilities, thr);
}

PlanarMotion motion_from_history(std::span<const Point2> past)
{
  if (past.size() < 2) {
    throw ContractError("planar velocity needs two history frames");
  }
  const Point2 last = past.back();
  const Point2 prev = past[past.size() - 2];
  return {last, {last.x - prev.x, last.y - prev.y}};
}

Trajectory constant_velocity_trajectory(const PlanarMotion & motion, double dt, std::size_t steps)
{
  if (!positive_finite(dt)) {
    throw DomainError("time step must be positive");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steps + 1);
  const Point2 p = motion.position, d = motion.step;
  traj.states.push_back(planar_state(p, d, dt));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double s = static_cast<double>(k);
    traj.states.push_back(planar_state({p.x + s * d.x, p.y + s * d.y}, d, dt));
  }
  return traj;
}

std::optional<double> traditional_ttc(const PlanarMotion & host, const PlanarMotion & ambient,
  const SafetyThresholds & thr)
{
  thr.validate();
  const auto n = thr.steps();
  return hf_ttc_mode(
    constant_velocity_trajectory(host, thr.dt, n), constant_velocity_trajectory(ambient, thr.dt, n), thr);
}

NetworkPredictor::NetworkPredictor(const model::Model & model, dynamics::BehaviorConfig behavior)
  : model_(model), behavior_(std::move(behavior))
{
}

model::HostHypothesis NetworkPredictor::host_hypothesis(const Scene & scene, dynamics::BehaviorMode mode) const
{
  return model::evaluation_hypothesis(scene, mode, model_.config(), behavior_);
}

std::vector<ModeSet> NetworkPredictor::predict(const Scene & scene, const model::HostHypothesis & host) const
{
  return model_.predict(scene, host, model::Phase::eval).ambient;
}

std::size_t NetworkPredictor::horizon() const { return model_.config().horizon; }

model::HostHypothesis ConstantVelocityPredictor::host_hypothesis(const Scene & scene, dynamics::BehaviorMode mode) const
{
  auto h = model::constant_velocity_hypothesis(scene, horizon_);
  h.behavior = mode;
  return h;
}

std::vector<ModeSet> ConstantVelocityPredictor::predict(const Scene & scene, const model::HostHypothesis &) const
{
  std::vector<ModeSet> out;
  for (std::size_t v = 1; v < scene.vehicle_count(); ++v) {
    const auto motion = motion_from_history(scene.past[v]);
    std::vector<Point2> traj(horizon_);
    for (std::size_t k = 0; k < horizon_; ++k) {
      const double s = static_cast<double>(k + 1);
      traj[k] = {motion.position.x + s * motion.step.x, motion.position.y + s * motion.step.y};
    }
    out.push_back({scene.vehicle_id(v), {std::move(traj)}, {1.0}});
  }
  return out;
}

nlohmann::ordered_json RiskReport::to_json() const
{
  nlohmann::ordered_json doc;
  doc["scene"] = scene;
  doc["thresholds"] = {{"rx", thresholds.rx}, {"ry", thresholds.ry}, {"horizon", thresholds.horizon}, {"dt", thresholds.dt}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto & p : pairs) {
    nlohmann::ordered_json j;
    j["pair"] = {p.host_id, p.ambient_id};
    j["behavior"] = p.behavior;
    j["ttc_atoms"] = atoms_json(p.ttc);
    j["no_event_mass"] = p.ttc.no_event_mass;
    j["ittc_atoms"] = atoms_json(p.ittc);
    j["traditional_ttc"] = p.traditional_ttc ? nlohmann::ordered_json(*p.traditional_ttc) : nlohmann::ordered_json();
    arr.push_back(std::move(j));
  }
  doc["pairs"] = std::move(arr);
  return doc;
}

RiskReport RiskReport::from_json(const nlohmann::json & doc)
{
  try {
    RiskReport r;
    r.scene = doc.at("scene").get<std::string>();
    const auto & t = doc.at("thresholds");
    r.thresholds = {t.at("rx").get<double>(), t.at("ry").get<double>(), t.at("horizon").get<double>(), t.at("dt").get<double>()};
    for (const auto & j : doc.at("pairs")) {
      PairRisk p;
      p.host_id = j.at("pair").at(0).get<std::int64_t>();
      p.ambient_id = j.at("pair").at(1).get<std::int64_t>();
      p.behavior = j.at("behavior").get<std::string>();
      p.ttc.atoms = atoms_from_json(j.at("ttc_atoms"));
      p.ttc.no_event_mass = j.at("no_event_mass").get<double>();
      p.ittc.atoms = atoms_from_json(j.at("ittc_atoms"));
      p.ittc.no_event_mass = p.ttc.no_event_mass;
      if (!j.at("traditional_ttc").is_null()) {
        p.traditional_ttc = j.at("traditional_ttc").get<double>();
      }
      r.pairs.push_back(std::move(p));
    }
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("malformed risk report: ") + e.what());
  }
}

RiskReport scenario_risk(const Scene & scene, const Predictor & predictor,
  std::span<const dynamics::BehaviorMode> modes, const SafetyThresholds & thr,
  const dynamics::BehaviorConfig & behavior)
{
  thr.validate();
  check_scene(scene);
  if (!same_clock(scene.dt, thr.dt)) {
    throw ContractError("scene and thresholds use different time steps");
  }
  if (thr.steps() < predictor.horizon()) {
    throw ConfigError("safety horizon shorter than the prediction horizon");
  }
  RiskReport report;
  report.scene = scene.id;
  report.thresholds = thr;
  const Point2 host_last = scene.past[0].back();
  const auto host_motion = motion_from_history(scene.past[0]);
  std::vector<std::optional<double>> traditional;
  for (std::size_t v = 1; v < scene.vehicle_count(); ++v) {
    traditional.push_back(traditional_ttc(host_motion, motion_from_history(scene.past[v]), thr));
  }
  for (const auto mode : modes) {
    const auto hyp = predictor.host_hypothesis(scene, mode);
    std::vector<Point2> pts{host_last};
    pts.insert(pts.end(), hyp.trajectory.begin(), hyp.trajectory.end());
    const auto host = extend_positions(pts, thr.dt, thr.steps(), behavior);
    const auto sets = predictor.predict(scene, hyp);
    if (sets.size() != scene.ambient_count()) {
      throw ContractError("predictor returned the wrong number of ambient vehicles");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      auto pair = ttc_distribution(host, scene.past[i + 1].back(), sets[i], thr, behavior);
      report.pairs.push_back({scene.host_id, scene.vehicle_id(i + 1), std::string(dynamics::to_string(mode)),
        std::move(pair.ttc), std::move(pair.ittc), traditional[i]});
    }
  }
  return report;
}

}  // namespace hfttc::safety
