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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace dyn = hfttc::dynamics;
using dyn::ControlInput;
using dyn::Point2;

namespace
{

std::vector<Point2> sample(std::size_t n, double dt, auto && f)
{
  std::vector<Point2> pts;
  for (std::size_t k = 0; k < n; ++k) {
    pts.push_back(f(static_cast<double>(k) * dt));
  }
  return pts;
}

dyn::Trajectory constant_control_history(ControlInput u, std::size_t frames)
{
  std::vector<ControlInput> us(frames - 1, u);
  return dyn::rollout(dyn::VehicleState(0, 0, 0, 10), us, dyn::GradientProfile(), 0.1, frames - 1);
}

}  // namespace

TEST(EstimateControls, StraightLine)
{
  const auto pts = sample(30, 0.1, [](double t) { return Point2{10.0 * t, 0.0}; });
  const auto est = dyn::estimate_controls(pts, 0.1);
  EXPECT_FALSE(est.degenerate);
  ASSERT_EQ(est.controls.size(), 30u);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_NEAR(est.speeds[k], 10.0, 1e-9);
    EXPECT_NEAR(est.controls[k].accel, 0.0, 1e-9);
    EXPECT_NEAR(est.controls[k].yaw_rate, 0.0, 1e-9);
  }
}

TEST(EstimateControls, UniformAcceleration)
{
  // a = 10 m/s^2 exceeds the default bound, so widen it.
  const dyn::ControlLimits wide{20.0, 1.0};
  const auto pts = sample(30, 0.1, [](double t) { return Point2{5.0 * t * t + 1.0, 0.0}; });
  const auto est = dyn::estimate_controls(pts, 0.1, wide);
  for (std::size_t k = 3; k + 3 < 30; ++k) {
    EXPECT_NEAR(est.controls[k].accel, 10.0, 1e-6);
  }
  const auto clamped = dyn::estimate_controls(pts, 0.1);
  EXPECT_LE(clamped.controls[10].accel, 8.0);
}

TEST(EstimateControls, CircularArc)
{
  const auto pts = sample(30, 0.1, [](double t) {
    return Point2{50.0 * std::sin(0.2 * t), 50.0 - 50.0 * std::cos(0.2 * t)};
  });
  const auto est = dyn::estimate_controls(pts, 0.1);
  for (std::size_t k = 2; k + 2 < 30; ++k) {
    EXPECT_NEAR(est.controls[k].yaw_rate, 0.2, 1e-3);
    EXPECT_NEAR(est.speeds[k], 10.0, 1e-2);
  }
}

TEST(EstimateControls, DegenerateTrajectoryIsFlagged)
{
  const std::vector<Point2> pts(10, Point2{3.0, 4.0});
  const auto est = dyn::estimate_controls(pts, 0.1);
  EXPECT_TRUE(est.degenerate);
  for (const auto & u : est.controls) {
    EXPECT_EQ(u, ControlInput{});
  }
}

TEST(EstimateControls, TooShortIsContractError)
{
  const std::vector<Point2> pts(2);
  EXPECT_THROW(dyn::estimate_controls(pts, 0.1), hfttc::ContractError);
}

TEST(EstimateControls, RecoversRolloutControls)
{
  for (const ControlInput u : {ControlInput{1.0, 0.1}, ControlInput{-2.0, -0.3}, ControlInput{0.5, 0.0}}) {
    const auto traj = constant_control_history(u, 40);
    const auto est = dyn::estimate_controls(traj);
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
      EXPECT_NEAR(est.controls[k].accel, u.accel, 1e-3);
      EXPECT_NEAR(est.controls[k].yaw_rate, u.yaw_rate, 1e-3);
    }
  }
}

TEST(EstimateControls, HeadingIsUnwrapped)
{
  // Turning left through +pi.
  const auto pts = sample(60, 0.1, [](double t) {
    const double a = 2.5 + 0.5 * t;
    return Point2{20.0 * std::sin(a), -20.0 * std::cos(a)};
  });
  const auto est = dyn::estimate_controls(pts, 0.1);
  for (std::size_t k = 1; k < est.headings.size(); ++k) {
    EXPECT_LT(std::abs(est.headings[k] - est.headings[k - 1]), 0.2);
  }
}

TEST(BehaviorControls, ConstantControlIsFixedPoint)
{
  const ControlInput u{0.8, 0.05};
  const auto history = constant_control_history(u, 30);
  const auto a = dyn::behavior_controls(history, dyn::BehaviorMode::last_step, 20);
  const auto b = dyn::behavior_controls(history, dyn::BehaviorMode::average, 20);
  const auto c = dyn::behavior_controls(history, dyn::BehaviorMode::self_prediction, 20);
  ASSERT_EQ(a.size(), 20u);
  ASSERT_EQ(c.size(), 20u);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_NEAR(a[k].accel, u.accel, 1e-3);
    EXPECT_NEAR(b[k].accel, u.accel, 1e-3);
    EXPECT_NEAR(c[k].accel, u.accel, 1e-3);
    EXPECT_NEAR(a[k].yaw_rate, u.yaw_rate, 1e-3);
    EXPECT_NEAR(b[k].yaw_rate, u.yaw_rate, 1e-3);
    EXPECT_NEAR(c[k].yaw_rate, u.yaw_rate, 1e-3);
  }
}

TEST(BehaviorControls, RampDistinguishesLastFromAverage)
{
  // a(t) ramps linearly from 0 to 2 over the window.
  const std::size_t n = 31;
  const double dt = 0.1, T = dt * (n - 1);
  const auto pts = sample(n, dt, [&](double t) {
    return Point2{10.0 * t + t * t * t / (3.0 * T), 0.0};
  });
  const auto history = dyn::trajectory_from_positions(pts, dt);
  const auto last = dyn::behavior_controls(history, dyn::BehaviorMode::last_step, 5);
  const auto avg = dyn::behavior_controls(history, dyn::BehaviorMode::average, 5);
  EXPECT_NEAR(last[0].accel, 2.0, 0.05);
  EXPECT_NEAR(avg[0].accel, 1.0, 0.05);
}

TEST(BehaviorControls, StationaryHistoryStaysAtRest)
{
  const std::vector<Point2> pts(30, Point2{0.0, 0.0});
  const auto history = dyn::trajectory_from_positions(pts, 0.1);
  for (auto mode : dyn::kAllBehaviorModes) {
    const auto u = dyn::behavior_controls(history, mode, 10);
    for (const auto & c : u) {
      EXPECT_EQ(c, ControlInput{});
    }
    const auto traj = dyn::rollout(history.back(), u, dyn::GradientProfile(), 0.1, 10);
    EXPECT_EQ(traj.back().px(), 0.0);
    EXPECT_EQ(traj.back().py(), 0.0);
  }
}

TEST(BehaviorControls, UnknownTagIsContractError)
{
  EXPECT_THROW(dyn::parse_behavior_mode("teleport"), hfttc::ContractError);
  for (auto mode : dyn::kAllBehaviorModes) {
    EXPECT_EQ(dyn::parse_behavior_mode(dyn::to_string(mode)), mode);
  }
}
