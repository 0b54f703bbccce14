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

#ifndef HFTTC__CORE__CONTROLS_HPP_
#define HFTTC__CORE__CONTROLS_HPP_

#include "hfttc/core/dynamics.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hfttc::dynamics
{

/// Per-frame kinematics recovered from positions.
struct ControlEstimate
{
  std::vector<ControlInput> controls;
  std::vector<double> speeds;
  /// Unwrapped headings.
  std::vector<double> headings;
  /// Set when every position coincides; all outputs are then zero.
  bool degenerate = false;

  /// State at frame k combining the given position with the estimated
  /// heading and speed.
  VehicleState state_at(std::size_t k, Point2 position) const;
};

/// Speed and heading by central differences of positions (one-sided stencils
/// of the same order at the ends), acceleration and yaw rate by differencing
/// those, each smoothed by a centered moving average of five frames that
/// shrinks symmetrically near the ends. Results are clamped to `limits`.
/// Requires at least three positions.
ControlEstimate estimate_controls(
  std::span<const Point2> positions, double dt, const ControlLimits & limits = {});
ControlEstimate estimate_controls(const Trajectory & trajectory, const ControlLimits & limits = {});

/// Builds a trajectory whose headings and speeds are estimated from positions.
Trajectory trajectory_from_positions(
  std::span<const Point2> positions, double dt, const ControlLimits & limits = {});

std::vector<Point2> positions_of(const Trajectory & trajectory);

enum class BehaviorMode { last_step, average, self_prediction };

/// Throws ContractError for unknown tags.
BehaviorMode parse_behavior_mode(std::string_view tag);
std::string_view to_string(BehaviorMode mode);
inline constexpr BehaviorMode kAllBehaviorModes[] = {
  BehaviorMode::last_step, BehaviorMode::average, BehaviorMode::self_prediction};

struct BehaviorConfig
{
  DynamicsConfig dynamics{};
  GradientProfile gradient{};
  /// Frames of context used by self-prediction re-estimation; 0 means the
  /// full history length.
  std::size_t window = 0;
};

/// Host control hypothesis over `steps` future steps:
///  - last_step: final estimated control held constant;
///  - average: mean estimated control over the history held constant;
///  - self_prediction: at every step re-estimate from the most recent window
///    of (history + generated states), apply the latest estimate for one RK4
///    step, and continue.
std::vector<ControlInput> behavior_controls(
  const Trajectory & history, BehaviorMode mode, std::size_t steps, const BehaviorConfig & config = {});

}  // namespace hfttc::dynamics

#endif  // HFTTC__CORE__CONTROLS_HPP_
