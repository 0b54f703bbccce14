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

#ifndef HFTTC__CORE__DYNAMICS_HPP_
#define HFTTC__CORE__DYNAMICS_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hfttc::dynamics
{

/// Standard gravity [m/s^2].
inline constexpr double kStandardGravity = 9.80665;

/// Planar pose and speed. Speed is never negative.
class VehicleState
{
public:
  VehicleState() = default;
  /// Throws DomainError for non-finite fields or negative speed.
  VehicleState(double px, double py, double heading, double speed);

  double px() const { return px_; }
  double py() const { return py_; }
  double heading() const { return heading_; }
  double speed() const { return speed_; }

  std::array<double, 4> as_array() const { return {px_, py_, heading_, speed_}; }

  friend bool operator==(const VehicleState &, const VehicleState &) = default;

private:
  double px_ = 0.0;
  double py_ = 0.0;
  double heading_ = 0.0;
  double speed_ = 0.0;
};

struct Point2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2 &, const Point2 &) = default;
};

/// Commanded longitudinal acceleration [m/s^2] and yaw rate [rad/s].
struct ControlInput
{
  double accel = 0.0;
  double yaw_rate = 0.0;

  friend bool operator==(const ControlInput &, const ControlInput &) = default;
};

struct ControlLimits
{
  double max_accel = 8.0;
  double max_yaw_rate = 1.0;

  ControlInput clamp(ControlInput u) const;
  bool admits(ControlInput u) const;
};

/// Road gradient angle as a function of time; |alpha| < pi/2.
class GradientProfile
{
public:
  /// Flat road.
  GradientProfile();
  static GradientProfile constant(double alpha);
  explicit GradientProfile(std::function<double(double)> alpha_of_t);

  /// Throws DomainError when the profile leaves (-pi/2, pi/2).
  double at(double t) const;

private:
  std::function<double(double)> alpha_;
};

struct DynamicsConfig
{
  double gravity = kStandardGravity;
  double wheelbase = 2.7;
  ControlLimits limits{};
};

/// Uniformly sampled sequence of states.
struct Trajectory
{
  double dt = 0.1;
  std::vector<VehicleState> states;
  /// Number of RK4 steps whose speed was clamped at zero.
  std::size_t speed_clamps = 0;

  std::size_t size() const { return states.size(); }
  const VehicleState & back() const { return states.back(); }
};

using StateVector = std::array<double, 4>;

/// (v cos psi, v sin psi, omega, a - g sin alpha).
StateVector state_derivative(
  const StateVector & s, ControlInput u, double alpha, double gravity = kStandardGravity);
StateVector state_derivative(
  const VehicleState & s, ControlInput u, double alpha, double gravity = kStandardGravity);

/// Bicycle-model yaw rate (v / L) tan(delta). Throws DomainError for
/// |delta| >= pi/2 or L <= 0.
double steering_to_yaw_rate(double speed, double steering, double wheelbase);

struct StepResult
{
  VehicleState state;
  bool speed_clamped = false;
};

/// Control schedule evaluated at t, t + dt/2 and t + dt.
using ControlSchedule = std::function<ControlInput(double t)>;

/// One classical fourth-order Runge-Kutta step from time t. A negative
/// resulting speed is clamped to zero and reported.
StepResult rk4_step(
  const VehicleState & s, const ControlSchedule & controls, const GradientProfile & gradient,
  double t, double dt, const DynamicsConfig & config = {});

/// Piecewise-constant control over the step.
StepResult rk4_step(
  const VehicleState & s, ControlInput u, const GradientProfile & gradient, double t, double dt,
  const DynamicsConfig & config = {});

/// n RK4 steps holding controls[k] over step k; returns n + 1 states.
/// Throws ContractError when fewer than n controls are supplied.
Trajectory rollout(
  const VehicleState & s0, std::span<const ControlInput> controls, const GradientProfile & gradient,
  double dt, std::size_t steps, const DynamicsConfig & config = {}, double t0 = 0.0);

/// Constant-control continuation of a state past the prediction horizon.
Trajectory extrapolate_beyond_horizon(
  const VehicleState & s_end, ControlInput u_end, const GradientProfile & gradient, double dt,
  std::size_t steps, const DynamicsConfig & config = {}, double t0 = 0.0);

/// Heading difference wrapped to (-pi, pi].
double wrap_angle(double a);

}  // namespace hfttc::dynamics

#endif  // HFTTC__CORE__DYNAMICS_HPP_
