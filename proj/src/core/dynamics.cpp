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

#include "hfttc/core/dynamics.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace hfttc::dynamics
{

VehicleState::VehicleState(double px, double py, double heading, double speed)
: px_(px), py_(py), heading_(heading), speed_(speed)
{
  if (!std::isfinite(px) || !std::isfinite(py) || !std::isfinite(heading) || !std::isfinite(speed)) {
    throw DomainError("vehicle state must be finite");
  }
  if (speed < 0.0) {
    std::ostringstream os;
    os << "vehicle speed must be non-negative, got " << speed;
    throw DomainError(os.str());
  }
}

ControlInput ControlLimits::clamp(ControlInput u) const
{
  return {std::clamp(u.accel, -max_accel, max_accel), std::clamp(u.yaw_rate, -max_yaw_rate, max_yaw_rate)};
}

bool ControlLimits::admits(ControlInput u) const
{
  return std::isfinite(u.accel) && std::isfinite(u.yaw_rate) && std::abs(u.accel) <= max_accel &&
         std::abs(u.yaw_rate) <= max_yaw_rate;
}

GradientProfile::GradientProfile() : alpha_([](double) { return 0.0; }) {}

GradientProfile::GradientProfile(std::function<double(double)> alpha_of_t) : alpha_(std::move(alpha_of_t)) {}

GradientProfile GradientProfile::constant(double alpha)
{
  if (!(std::abs(alpha) < std::numbers::pi / 2)) {
    throw DomainError("road gradient must lie in (-pi/2, pi/2)");
  }
  return GradientProfile([alpha](double) { return alpha; });
}

double GradientProfile::at(double t) const
{
  const double a = alpha_(t);
  if (!(std::abs(a) < std::numbers::pi / 2)) {
    throw DomainError("road gradient must lie in (-pi/2, pi/2)");
  }
  return a;
}

StateVector state_derivative(const StateVector & s, ControlInput u, double alpha, double gravity)
{
  return {s[3] * std::cos(s[2]), s[3] * std::sin(s[2]), u.yaw_rate, u.accel - gravity * std::sin(alpha)};
}

StateVector state_derivative(const VehicleState & s, ControlInput u, double alpha, double gravity)
{
  return state_derivative(s.as_array(), u, alpha, gravity);
}

double steering_to_yaw_rate(double speed, double steering, double wheelbase)
{
  if (!(wheelbase > 0.0)) {
    throw DomainError("wheelbase must be positive");
  }
  if (!(std::abs(steering) < std::numbers::pi / 2)) {
    throw DomainError("steering angle must lie in (-pi/2, pi/2)");
  }
  return speed / wheelbase * std::tan(steering);
}

namespace
{
StateVector axpy(const StateVector & x, double h, const StateVector & k)
{
  return {x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]};
}
}  // namespace

StepResult rk4_step(
  const VehicleState & s, const ControlSchedule & controls, const GradientProfile & gradient,
  double t, double dt, const DynamicsConfig & config)
{
  if (!(dt > 0.0)) {
    throw DomainError("time step must be positive");
  }
  const double half = 0.5 * dt;
  const double g = config.gravity;
  const StateVector x = s.as_array();
  const ControlInput u0 = controls(t);
  const ControlInput um = controls(t + half);
  const ControlInput u1 = controls(t + dt);
  const double a0 = gradient.at(t);
  const double am = gradient.at(t + half);
  const double a1 = gradient.at(t + dt);

  const StateVector k1 = state_derivative(x, u0, a0, g);
  const StateVector k2 = state_derivative(axpy(x, half, k1), um, am, g);
  const StateVector k3 = state_derivative(axpy(x, half, k2), um, am, g);
  const StateVector k4 = state_derivative(axpy(x, dt, k3), u1, a1, g);

  StateVector next;
  for (std::size_t i = 0; i < 4; ++i) {
    next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  StepResult result;
  if (next[3] < 0.0) {
    next[3] = 0.0;
    result.speed_clamped = true;
  }
  result.state = VehicleState(next[0], next[1], next[2], next[3]);
  return result;
}

StepResult rk4_step(
  const VehicleState & s, ControlInput u, const GradientProfile & gradient, double t, double dt,
  const DynamicsConfig & config)
{
  return rk4_step(s, [u](double) { return u; }, gradient, t, dt, config);
}

Trajectory rollout(
  const VehicleState & s0, std::span<const ControlInput> controls, const GradientProfile & gradient,
  double dt, std::size_t steps, const DynamicsConfig & config, double t0)
{
  if (controls.size() < steps) {
    std::ostringstream os;
    os << "rollout needs " << steps << " controls, got " << controls.size();
    throw ContractError(os.str());
  }
  if (!(dt > 0.0)) {
    throw DomainError("time step must be positive");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steps + 1);
  traj.states.push_back(s0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    auto step = rk4_step(traj.states.back(), controls[k], gradient, t, dt, config);
    traj.speed_clamps += step.speed_clamped ? 1 : 0;
    traj.states.push_back(step.state);
  }
  return traj;
}

Trajectory extrapolate_beyond_horizon(
  const VehicleState & s_end, ControlInput u_end, const GradientProfile & gradient, double dt,
  std::size_t steps, const DynamicsConfig & config, double t0)
{
  const std::vector<ControlInput> held(steps, u_end);
  return rollout(s_end, held, gradient, dt, steps, config, t0);
}

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) {
    a += two_pi;
  }
  return a - std::numbers::pi;
}

}  // namespace hfttc::dynamics
