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

#ifndef HFTTC__CORE__SAFETY_HPP_
#define HFTTC__CORE__SAFETY_HPP_

#include "hfttc/core/controls.hpp"
#include "hfttc/core/model.hpp"
#include "hfttc/core/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hfttc::safety
{

using dynamics::Trajectory;
using model::ModeSet;

struct SafetyThresholds
{
  /// Longitudinal and lateral gates [m].
  double rx = 5.0;
  double ry = 2.0;
  /// Search horizon [s].
  double horizon = 10.0;
  double dt = 0.1;

  /// Throws ConfigError unless every field is positive and finite.
  void validate() const;
  /// Number of samples after t0 covered by the horizon.
  std::size_t steps() const;
};

struct TtcAtom
{
  double value = 0.0;
  double probability = 0.0;
  friend bool operator==(const TtcAtom &, const TtcAtom &) = default;
};

/// Discrete distribution: atoms sorted by value plus the mass of "no event
/// within the horizon".
struct TtcDistribution
{
  std::vector<TtcAtom> atoms;
  double no_event_mass = 1.0;

  /// F(t) = sum of atom probabilities with value <= t.
  double cdf(double t) const;
  double total_mass() const;
  /// (t, F(t)) on the grid k * dt, k = 0 .. round(horizon / dt).
  std::vector<std::pair<double, double>> cdf_samples(double dt, double horizon) const;

  friend bool operator==(const TtcDistribution &, const TtcDistribution &) = default;
};

struct TtcPair
{
  TtcDistribution ttc;
  /// Atoms (1 / ttc, p); the no-event mass carries over unchanged.
  TtcDistribution ittc;
};

/// First sample k >= 1 with |dx| <= rx and |dy| <= ry, returned as the
/// duration k * dt; nullopt when none occurs within the horizon. Sample 0 of
/// both trajectories is t0. Throws ContractError when either trajectory is
/// sampled at a different dt or is shorter than the horizon.
std::optional<double> hf_ttc_mode(const Trajectory & host, const Trajectory & ambient, const SafetyThresholds & thr);

/// Trajectory through `positions` (sample 0 = t0) with estimated headings and
/// speeds, continued past its end under the last estimated control until it
/// spans `steps` samples after t0.
Trajectory extend_positions(std::span<const Point2> positions, double dt, std::size_t steps,
  const dynamics::BehaviorConfig & behavior = {});

/// Trajectory of a predicted mode anchored at the vehicle's last observed
/// position.
Trajectory mode_trajectory(Point2 last_observed, const std::vector<Point2> & mode, const SafetyThresholds & thr,
  const dynamics::BehaviorConfig & behavior = {});

/// Builds the TTC and ITTC distributions of one host trajectory against every
/// mode of an ambient vehicle. Modes with equal TTC are merged.
TtcPair ttc_distribution(const Trajectory & host, Point2 ambient_last, const ModeSet & modes,
  const SafetyThresholds & thr, const dynamics::BehaviorConfig & behavior = {});

/// Same as above on precomputed ambient mode trajectories.
TtcPair ttc_distribution(const Trajectory & host, std::span<const Trajectory> modes,
  std::span<const double> probabilities, const SafetyThresholds & thr);

/// Position at t0 and displacement per sample (planar velocity times dt).
struct PlanarMotion
{
  Point2 position;
  Point2 step;
};

/// Motion from the last two frames of a history.
PlanarMotion motion_from_history(std::span<const Point2> past);

/// Constant planar velocity samples p + k step, k = 0 .. steps.
Trajectory constant_velocity_trajectory(const PlanarMotion & motion, double dt, std::size_t steps);

/// Both vehicles at constant planar velocity, same crossing rule.
std::optional<double> traditional_ttc(const PlanarMotion & host, const PlanarMotion & ambient,
  const SafetyThresholds & thr);

/// Source of host hypotheses and ambient mode sets.
class Predictor
{
public:
  virtual ~Predictor() = default;
  virtual model::HostHypothesis host_hypothesis(const Scene & scene, dynamics::BehaviorMode mode) const = 0;
  virtual std::vector<ModeSet> predict(const Scene & scene, const model::HostHypothesis & host) const = 0;
  /// Frames predicted after t0.
  virtual std::size_t horizon() const = 0;
};

/// The trained hypergraph transformer.
class NetworkPredictor : public Predictor
{
public:
  explicit NetworkPredictor(const model::Model & model, dynamics::BehaviorConfig behavior = {});
  model::HostHypothesis host_hypothesis(const Scene & scene, dynamics::BehaviorMode mode) const override;
  std::vector<ModeSet> predict(const Scene & scene, const model::HostHypothesis & host) const override;
  std::size_t horizon() const override;

private:
  const model::Model & model_;
  dynamics::BehaviorConfig behavior_;
};

/// One constant-velocity mode per ambient vehicle and a constant-velocity host.
class ConstantVelocityPredictor : public Predictor
{
public:
  explicit ConstantVelocityPredictor(std::size_t horizon) : horizon_(horizon) {}
  model::HostHypothesis host_hypothesis(const Scene & scene, dynamics::BehaviorMode mode) const override;
  std::vector<ModeSet> predict(const Scene & scene, const model::HostHypothesis & host) const override;
  std::size_t horizon() const override { return horizon_; }

private:
  std::size_t horizon_;
};

struct PairRisk
{
  std::int64_t host_id = 0;
  std::int64_t ambient_id = 0;
  std::string behavior;
  TtcDistribution ttc;
  TtcDistribution ittc;
  std::optional<double> traditional_ttc;
};

struct RiskReport
{
  std::string scene;
  SafetyThresholds thresholds;
  std::vector<PairRisk> pairs;

  /// {"scene", "thresholds", "pairs": [{pair, behavior, ttc_atoms,
  /// no_event_mass, ittc_atoms, traditional_ttc}]}.
  nlohmann::ordered_json to_json() const;
  /// Inverse of to_json (used by the plotting front end).
  static RiskReport from_json(const nlohmann::json & doc);
};

/// Per behavior hypothesis: host trajectory, ambient mode sets, TTC
/// distributions per ambient vehicle, and the traditional TTC per pair.
RiskReport scenario_risk(const Scene & scene, const Predictor & predictor,
  std::span<const dynamics::BehaviorMode> modes, const SafetyThresholds & thr,
  const dynamics::BehaviorConfig & behavior = {});

}  // namespace hfttc::safety

#endif  // HFTTC__CORE__SAFETY_HPP_
