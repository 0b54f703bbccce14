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

#include "hfttc/core/training.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace hfttc::training
{

namespace nx = numerics;
using nx::Tensor;
using nx::Var;

namespace
{

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_modes(const std::vector<Point2> & truth, const ModeSet & modes)
{
  if (modes.trajectories.empty()) {
    throw ContractError("mode set is empty");
  }
  for (const auto & m : modes.trajectories) {
    if (m.size() != truth.size()) {
      throw ContractError("mode trajectory length differs from the ground truth");
    }
  }
}

}  // namespace

void LossConfig::validate() const
{
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a finite non-negative number");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a finite non-negative number");
  }
  if (batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  if (!(confidence_weight >= 0.0)) {
    throw ConfigError("confidence weight must be non-negative");
  }
}

std::vector<double> mode_squared_errors(const std::vector<Point2> & truth, const ModeSet & modes)
{
  check_modes(truth, modes);
  std::vector<double> out;
  for (const auto & m : modes.trajectories) {
    double s = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double dx = truth[t].x - m[t].x, dy = truth[t].y - m[t].y;
      s += dx * dx + dy * dy;
    }
    out.push_back(s);
  }
  return out;
}

double loss_value(const std::vector<Point2> & truth, const ModeSet & modes, double lambda)
{
  const auto sse = mode_squared_errors(truth, modes);
  const double best = *std::min_element(sse.begin(), sse.end());
  const double mean = std::accumulate(sse.begin(), sse.end(), 0.0) / static_cast<double>(sse.size());
  return best + lambda * mean;
}

std::size_t select_best_mode(const std::vector<Point2> & truth, const ModeSet & modes)
{
  check_modes(truth, modes);
  std::size_t best = 0;
  double best_err = 0.0;
  for (std::size_t m = 0; m < modes.trajectories.size(); ++m) {
    double s = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      s += std::hypot(truth[t].x - modes.trajectories[m][t].x, truth[t].y - modes.trajectories[m][t].y);
    }
    if (m == 0 || s < best_err) {
      best = m;
      best_err = s;
    }
  }
  return best;
}

LossTerms scene_loss(nx::Tape & tape, const model::ForwardGraph & graph, const Scene & scene, const LossConfig & config)
{
  LossTerms terms;
  const std::size_t a = scene.ambient_count();
  terms.vehicles = a;
  if (a == 0) {
    const Var zero = tape.constant(Tensor::scalar(0.0));
    terms.total = terms.best = terms.average = zero;
    return terms;
  }
  const std::size_t m_count = graph.mode_positions.size();
  if (m_count == 0) {
    throw ContractError("loss needs at least one mode");
  }
  const std::size_t tp = scene.future_length();
  if (graph.mode_positions.front().value().cols() != 2 * tp) {
    throw ContractError("prediction horizon differs from the scene future length");
  }
  Tensor truth = Tensor::zeros(a, 2 * tp);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t k = 0; k < tp; ++k) {
      truth(i, 2 * k) = scene.future[i + 1][k].x;
      truth(i, 2 * k + 1) = scene.future[i + 1][k].y;
    }
  }
  const Var y = tape.constant(std::move(truth));
  std::vector<Var> per_mode;
  for (const auto & pos : graph.mode_positions) {
    per_mode.push_back(nx::squared_error_rows(pos, y));
  }
  const Var errors = per_mode.size() == 1 ? per_mode.front() : nx::concat_cols(per_mode);

  Tensor onehot = Tensor::zeros(a, m_count);
  const Tensor & e = errors.value();
  for (std::size_t i = 0; i < a; ++i) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < m_count; ++m) {
      if (e(i, m) < e(i, best)) {
        best = m;
      }
    }
    onehot(i, best) = 1.0;
  }
  const Var pick = tape.constant(onehot);
  terms.best = nx::sum(nx::mul(errors, pick));
  terms.average = nx::scale(nx::sum(errors), 1.0 / static_cast<double>(m_count));
  terms.total = nx::add(terms.best, nx::scale(terms.average, config.lambda));
  if (config.confidence_loss && m_count > 1) {
    const Var ce = nx::scale(nx::sum(nx::mul(nx::log_softmax_rows(graph.logits), pick)), -config.confidence_weight);
    terms.total = nx::add(terms.total, ce);
  }
  return terms;
}

// ---------------------------------------------------------------------------
// Metrics

nlohmann::ordered_json MetricsReport::to_json() const
{
  nlohmann::ordered_json j;
  j["ade"] = ade;
  j["fde"] = fde;
  j["mae"] = mae;
  j["rmse"] = rmse;
  auto & table = j["rmse_at"];
  table = nlohmann::ordered_json::object();
  for (const auto & [h, v] : rmse_at) {
    table[std::to_string(h)] = v;
  }
  j["samples"] = samples;
  return j;
}

MetricsReport compute_metrics(
  const std::vector<std::vector<Point2>> & truth, const std::vector<std::vector<Point2>> & predicted)
{
  if (truth.empty()) {
    throw ContractError("metrics need at least one trajectory");
  }
  if (truth.size() != predicted.size()) {
    throw ContractError("prediction and ground-truth counts differ");
  }
  const std::size_t t_len = truth.front().size();
  if (t_len == 0) {
    throw ContractError("metrics need at least one frame");
  }
  MetricsReport r;
  r.samples = truth.size();
  std::vector<double> sq_at(t_len, 0.0);
  double l2 = 0.0, l1 = 0.0, sq = 0.0, final_l2 = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != t_len || predicted[i].size() != t_len) {
      throw ContractError("prediction and ground-truth lengths differ");
    }
    for (std::size_t t = 0; t < t_len; ++t) {
      const double dx = truth[i][t].x - predicted[i][t].x;
      const double dy = truth[i][t].y - predicted[i][t].y;
      const double d2 = dx * dx + dy * dy;
      l2 += std::sqrt(d2);
      l1 += std::abs(dx) + std::abs(dy);
      sq += d2;
      sq_at[t] += d2;
    }
    final_l2 += std::hypot(truth[i][t_len - 1].x - predicted[i][t_len - 1].x,
      truth[i][t_len - 1].y - predicted[i][t_len - 1].y);
  }
  const double n = static_cast<double>(truth.size());
  const double nt = n * static_cast<double>(t_len);
  r.ade = l2 / nt;
  r.mae = l1 / nt;
  r.rmse = std::sqrt(sq / nt);
  r.fde = final_l2 / n;
  for (std::size_t h : kRmseHorizons) {
    if (h <= t_len) {
      r.rmse_at[h] = std::sqrt(sq_at[h - 1] / n);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Optimizer

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
: lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps)
{
}

void Adam::step(nx::ParameterStore & params, const nx::GradientMap & grads)
{
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto & [name, p] : params.entries()) {
    const auto it = grads.find(name);
    if (it == grads.end()) {
      continue;
    }
    const Tensor & g = it->second;
    auto & m = m_.try_emplace(name, Tensor(p.shape())).first->second;
    auto & v = v_.try_emplace(name, Tensor(p.shape())).first->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      if (lr_ != 0.0) {
        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Training loop

std::vector<TrainLogRow> train(
  model::Model & model, std::span<const Scene> scenes, const LossConfig & config, const TrainOptions & options)
{
  config.validate();
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (scenes[i].ambient_count() > 0) {
      usable.push_back(i);
    }
  }
  if (usable.empty()) {
    throw ContractError("training split has no scene with ambient vehicles");
  }
  std::mt19937_64 rng(config.seed);
  auto reshuffle = [&](std::vector<std::size_t> & order) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(nx::uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
  };
  std::vector<std::size_t> order = usable;
  reshuffle(order);
  std::size_t cursor = 0;

  Adam adam(config.learning_rate);
  std::vector<TrainLogRow> log;
  log.reserve(config.steps);
  const std::size_t batch = std::min(config.batch_size, usable.size());
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const auto start = std::chrono::steady_clock::now();
    nx::Tape tape;
    const auto w = model.parameters().bind(tape);
    Var total, best, average;
    std::size_t vehicles = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        reshuffle(order);
        cursor = 0;
      }
      const Scene & scene = scenes[order[cursor++]];
      const auto graph = model.forward(
        tape, w, scene, model::ground_truth_hypothesis(scene), model::Phase::train);
      const auto terms = scene_loss(tape, graph, scene, config);
      vehicles += terms.vehicles;
      total = total.valid() ? nx::add(total, terms.total) : terms.total;
      best = best.valid() ? nx::add(best, terms.best) : terms.best;
      average = average.valid() ? nx::add(average, terms.average) : terms.average;
    }
    const double inv = 1.0 / static_cast<double>(vehicles);
    const Var loss = nx::scale(total, inv);
    TrainLogRow row;
    row.step = step;
    row.loss = loss.value()[0];
    row.best_term = best.value()[0] * inv;
    row.average_term = average.value()[0] * inv;
    if (!std::isfinite(row.loss)) {
      std::ostringstream os;
      os << "training diverged at step " << step << ": loss is " << row.loss;
      throw NumericError(os.str());
    }
    const auto grads = tape.gradient(loss);
    for (const auto & [name, g] : grads) {
      if (!g.all_finite()) {
        std::ostringstream os;
        os << "training diverged at step " << step << ": non-finite gradient for '" << name << "'";
        throw NumericError(os.str());
      }
    }
    adam.step(model.parameters(), grads);
    if (options.record_wall_time) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    if (options.on_step) {
      options.on_step(row);
    }
    log.push_back(row);
  }
  return log;
}

std::string train_log_csv(std::span<const TrainLogRow> log)
{
  std::string out = "step,loss,best_of_M_term,average_term,wall_ms\n";
  for (const auto & r : log) {
    out += std::to_string(r.step) + "," + fmt(r.loss) + "," + fmt(r.best_term) + "," + fmt(r.average_term) + "," +
           fmt(r.wall_ms) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

const MetricsReport & EvaluationReport::at(const std::string & name) const
{
  for (const auto & b : blocks) {
    if (b.name == name) {
      return b.metrics;
    }
  }
  throw ContractError("no evaluation block named '" + name + "'");
}

nlohmann::ordered_json EvaluationReport::to_json() const
{
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto & b : blocks) {
    j[b.name] = b.metrics.to_json();
  }
  return j;
}

std::string EvaluationReport::rmse_table_csv() const
{
  std::string out = "block";
  for (std::size_t h : kRmseHorizons) {
    out += "," + std::to_string(h);
  }
  out += "\n";
  for (const auto & b : blocks) {
    out += b.name;
    for (std::size_t h : kRmseHorizons) {
      const auto it = b.metrics.rmse_at.find(h);
      out += "," + (it == b.metrics.rmse_at.end() ? std::string() : fmt(it->second));
    }
    out += "\n";
  }
  return out;
}

std::vector<std::vector<Point2>> constant_velocity_futures(const Scene & scene, std::size_t steps)
{
  std::vector<std::vector<Point2>> out;
  for (std::size_t v = 1; v < scene.vehicle_count(); ++v) {
    const auto & past = scene.past[v];
    const Point2 last = past.back();
    const Point2 prev = past[past.size() - 2];
    std::vector<Point2> traj(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double s = static_cast<double>(k + 1);
      traj[k] = {last.x + s * (last.x - prev.x), last.y + s * (last.y - prev.y)};
    }
    out.push_back(std::move(traj));
  }
  return out;
}

EvaluationReport evaluate(const model::Model & model, std::span<const Scene> scenes,
  std::span<const dynamics::BehaviorMode> modes, bool baseline, const dynamics::BehaviorConfig & behavior)
{
  std::size_t vehicles = 0;
  for (const auto & s : scenes) {
    vehicles += s.ambient_count();
  }
  if (vehicles == 0) {
    throw ContractError("evaluation split has no ambient vehicles");
  }
  const auto & cfg = model.config();
  EvaluationReport report;
  for (const auto mode : modes) {
    std::vector<std::vector<Point2>> truth, best;
    for (const auto & scene : scenes) {
      if (scene.ambient_count() == 0) {
        continue;
      }
      const auto host = model::evaluation_hypothesis(scene, mode, cfg, behavior);
      const auto pred = model.predict(scene, host, model::Phase::eval);
      for (std::size_t i = 0; i < pred.ambient.size(); ++i) {
        const auto & y = scene.future[i + 1];
        const auto & ms = pred.ambient[i];
        truth.push_back(y);
        best.push_back(ms.trajectories[select_best_mode(y, ms)]);
      }
    }
    report.blocks.push_back({std::string(dynamics::to_string(mode)), compute_metrics(truth, best)});
  }
  if (baseline) {
    std::vector<std::vector<Point2>> truth, pred;
    for (const auto & scene : scenes) {
      auto cv = constant_velocity_futures(scene, scene.future_length());
      for (std::size_t i = 0; i < cv.size(); ++i) {
        truth.push_back(scene.future[i + 1]);
        pred.push_back(std::move(cv[i]));
      }
    }
    report.blocks.push_back({"traditional", compute_metrics(truth, pred)});
  }
  return report;
}

}  // namespace hfttc::training
