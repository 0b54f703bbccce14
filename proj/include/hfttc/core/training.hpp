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

#ifndef HFTTC__CORE__TRAINING_HPP_
#define HFTTC__CORE__TRAINING_HPP_

#include "hfttc/core/model.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hfttc::training
{

using model::ModeSet;

struct LossConfig
{
  /// Weight of the mean-over-modes term.
  double lambda = 1.0;
  double learning_rate = 1e-3;
  std::size_t steps = 500;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  /// Optional cross-entropy of the confidence logits against the best mode.
  bool confidence_loss = false;
  double confidence_weight = 1.0;

  /// Throws ConfigError.
  void validate() const;
};

/// Per-mode summed squared error sum_t |Y(t) - Y_m(t)|^2.
std::vector<double> mode_squared_errors(const std::vector<Point2> & truth, const ModeSet & modes);

/// min_m SSE_m + lambda * mean_m SSE_m. Throws ContractError for an empty
/// mode set.
double loss_value(const std::vector<Point2> & truth, const ModeSet & modes, double lambda);

/// argmin_m sum_t |Y(t) - Y_m(t)|_2, lowest index on ties.
std::size_t select_best_mode(const std::vector<Point2> & truth, const ModeSet & modes);

struct LossTerms
{
  /// Sums over the scene's ambient vehicles (not yet averaged).
  numerics::Var total;
  numerics::Var best;
  numerics::Var average;
  std::size_t vehicles = 0;
};

/// Differentiable loss of one forward pass against the scene's futures. The
/// best-of-M term routes its gradient to the argmin mode only.
LossTerms scene_loss(numerics::Tape & tape, const model::ForwardGraph & graph, const Scene & scene,
  const LossConfig & config);

/// Frames at which the per-horizon RMSE is tabulated.
inline constexpr std::size_t kRmseHorizons[] = {10, 20, 30, 40, 50};

struct MetricsReport
{
  double ade = 0.0;
  double fde = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  /// RMSE of the error at frame h (1-based).
  std::map<std::size_t, double> rmse_at;
  std::size_t samples = 0;

  nlohmann::ordered_json to_json() const;
};

/// ADE, FDE, MAE and RMSE over paired trajectories of equal length.
MetricsReport compute_metrics(
  const std::vector<std::vector<Point2>> & truth, const std::vector<std::vector<Point2>> & predicted);

/// Adaptive-moment optimizer with bias correction.
class Adam
{
public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(numerics::ParameterStore & params, const numerics::GradientMap & grads);
  std::size_t iterations() const { return t_; }

private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::map<std::string, numerics::Tensor> m_, v_;
};

struct TrainLogRow
{
  std::size_t step = 0;
  double loss = 0.0;
  double best_term = 0.0;
  double average_term = 0.0;
  double wall_ms = 0.0;
};

struct TrainOptions
{
  /// Fill wall_ms; off by default so logs are reproducible byte for byte.
  bool record_wall_time = false;
  std::function<void(const TrainLogRow &)> on_step;
};

/// Mini-batch training with teacher-forced host embeddings. Throws
/// ContractError for an empty split and NumericError when the loss stops
/// being finite.
std::vector<TrainLogRow> train(model::Model & model, std::span<const Scene> scenes, const LossConfig & config,
  const TrainOptions & options = {});

std::string train_log_csv(std::span<const TrainLogRow> log);

struct EvaluationBlock
{
  std::string name;
  MetricsReport metrics;
};

struct EvaluationReport
{
  std::vector<EvaluationBlock> blocks;

  const MetricsReport & at(const std::string & name) const;
  nlohmann::ordered_json to_json() const;
  /// block, then one column per tabulated horizon.
  std::string rmse_table_csv() const;
};

/// Constant-velocity extrapolation of each ambient vehicle from its last two
/// history frames.
std::vector<std::vector<Point2>> constant_velocity_futures(const Scene & scene, std::size_t steps);

/// Scores the best predicted mode of every ambient vehicle under each host
/// behavior hypothesis; `baseline` adds the constant-velocity block
/// "traditional".
EvaluationReport evaluate(const model::Model & model, std::span<const Scene> scenes,
  std::span<const dynamics::BehaviorMode> modes, bool baseline = true,
  const dynamics::BehaviorConfig & behavior = {});

}  // namespace hfttc::training

#endif  // HFTTC__CORE__TRAINING_HPP_
