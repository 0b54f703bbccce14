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

#include "hfttc/core/controls.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace hfttc::dynamics
{

namespace
{

constexpr double kStationaryDisplacement = 1e-9;  // m

// Derivative of a uniformly sampled series: five-point central differences
// in the interior with matching fourth-order one-sided stencils at the ends.
// Short series fall back to three-point stencils.
std::vector<double> differentiate(std::span<const double> f, double dt)
{
  const std::size_t n = f.size();
  std::vector<double> d(n);
  if (n < 5) {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    return d;
  }
  const double h12 = 12.0 * dt;
  for (std::size_t k = 2; k + 2 < n; ++k) {
    d[k] = (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / h12;
  }
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / h12;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / h12;
  const std::size_t e = n - 1;
  d[e] = (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]) / h12;
  d[e - 1] = (3.0 * f[e] + 10.0 * f[e - 1] - 18.0 * f[e - 2] + 6.0 * f[e - 3] - f[e - 4]) / h12;
  return d;
}

std::vector<double> smooth(std::span<const double> f)
{
  constexpr std::size_t kHalfWidth = 2;
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t h = std::min({kHalfWidth, k, n - 1 - k});
    double s = 0.0;
    for (std::size_t j = k - h; j <= k + h; ++j) {
      s += f[j];
    }
    out[k] = s / static_cast<double>(2 * h + 1);
  }
  return out;
}

}  // namespace

VehicleState ControlEstimate::state_at(std::size_t k, Point2 position) const
{
  return VehicleState(position.x, position.y, headings.at(k), speeds.at(k));
}

ControlEstimate estimate_controls(std::span<const Point2> positions, double dt, const ControlLimits & limits)
{
  const std::size_t n = positions.size();
  if (n < 3) {
    throw ContractError("control estimation needs at least 3 frames");
  }
  if (!(dt > 0.0)) {
    throw DomainError("time step must be positive");
  }
  ControlEstimate est;
  est.controls.assign(n, ControlInput{});
  est.speeds.assign(n, 0.0);
  est.headings.assign(n, 0.0);

  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = positions[k].x;
    ys[k] = positions[k].y;
  }
  const auto vx = differentiate(xs, dt);
  const auto vy = differentiate(ys, dt);

  std::vector<bool> moving(n);
  bool any_moving = false;
  for (std::size_t k = 0; k < n; ++k) {
    est.speeds[k] = std::hypot(vx[k], vy[k]);
    moving[k] = est.speeds[k] * dt > kStationaryDisplacement;
    any_moving = any_moving || moving[k];
  }
  if (!any_moving) {
    est.degenerate = true;
    std::fill(est.speeds.begin(), est.speeds.end(), 0.0);
    return est;
  }

  // Headings are undefined while stationary: carry the nearest defined value.
  std::vector<double> raw(n);
  std::size_t first = 0;
  while (!moving[first]) {
    ++first;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (moving[k]) {
      raw[k] = std::atan2(vy[k], vx[k]);
    } else {
      raw[k] = k < first ? std::atan2(vy[first], vx[first]) : raw[k - 1];
    }
  }
  est.headings[0] = raw[0];
  for (std::size_t k = 1; k < n; ++k) {
    est.headings[k] = est.headings[k - 1] + wrap_angle(raw[k] - est.headings[k - 1]);
  }

  const auto accel = smooth(differentiate(est.speeds, dt));
  const auto yaw = smooth(differentiate(est.headings, dt));
  for (std::size_t k = 0; k < n; ++k) {
    est.controls[k] = limits.clamp({accel[k], yaw[k]});
  }
  return est;
}

std::vector<Point2> positions_of(const Trajectory & trajectory)
{
  std::vector<Point2> out;
  out.reserve(trajectory.size());
  for (const auto & s : trajectory.states) {
    out.push_back({s.px(), s.py()});
  }
  return out;
}

ControlEstimate estimate_controls(const Trajectory & trajectory, const ControlLimits & limits)
{
  const auto pts = positions_of(trajectory);
  return estimate_controls(pts, trajectory.dt, limits);
}

Trajectory trajectory_from_positions(std::span<const Point2> positions, double dt, const ControlLimits & limits)
{
  const auto est = estimate_controls(positions, dt, limits);
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    traj.states.push_back(est.state_at(k, positions[k]));
  }
  return traj;
}

BehaviorMode parse_behavior_mode(std::string_view tag)
{
  if (tag == "last_step") {
    return BehaviorMode::last_step;
  }
  if (tag == "average") {
    return BehaviorMode::average;
  }
  if (tag == "self_prediction") {
    return BehaviorMode::self_prediction;
  }
  throw ContractError("unknown behavior mode '" + std::string(tag) + "'");
}

std::string_view to_string(BehaviorMode mode)
{
  switch (mode) {
    case BehaviorMode::last_step:
      return "last_step";
    case BehaviorMode::average:
      return "average";
    case BehaviorMode::self_prediction:
      return "self_prediction";
  }
  throw ContractError("invalid behavior mode");
}

std::vector<ControlInput> behavior_controls(
  const Trajectory & history, BehaviorMode mode, std::size_t steps, const BehaviorConfig & config)
{
  if (history.size() < 3) {
    throw ContractError("behavior models need at least 3 history frames");
  }
  const auto & limits = config.dynamics.limits;
  switch (mode) {
    case BehaviorMode::last_step: {
      const auto est = estimate_controls(history, limits);
      return std::vector<ControlInput>(steps, est.controls.back());
    }
    case BehaviorMode::average: {
      const auto est = estimate_controls(history, limits);
      ControlInput mean;
      for (const auto & u : est.controls) {
        mean.accel += u.accel;
        mean.yaw_rate += u.yaw_rate;
      }
      const double inv = 1.0 / static_cast<double>(est.controls.size());
      mean.accel *= inv;
      mean.yaw_rate *= inv;
      return std::vector<ControlInput>(steps, limits.clamp(mean));
    }
    case BehaviorMode::self_prediction: {
      const std::size_t window = std::max<std::size_t>(
        3, config.window == 0 ? history.size() : std::min(config.window, history.size()));
      std::deque<Point2> recent;
      for (std::size_t k = history.size() - window; k < history.size(); ++k) {
        recent.push_back({history.states[k].px(), history.states[k].py()});
      }
      std::vector<ControlInput> out;
      out.reserve(steps);
      VehicleState state = history.back();
      const double t_end = static_cast<double>(history.size() - 1) * history.dt;
      std::vector<Point2> buffer;
      for (std::size_t k = 0; k < steps; ++k) {
        buffer.assign(recent.begin(), recent.end());
        const auto est = estimate_controls(buffer, history.dt, limits);
        const ControlInput u = est.controls.back();
        out.push_back(u);
        const double t = t_end + static_cast<double>(k) * history.dt;
        state = rk4_step(state, u, config.gradient, t, history.dt, config.dynamics).state;
        recent.pop_front();
        recent.push_back({state.px(), state.py()});
      }
      return out;
    }
  }
  throw ContractError("invalid behavior mode");
}

}  // namespace hfttc::dynamics
