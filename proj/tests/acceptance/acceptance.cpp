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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include "cli_runner.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

#include "hfttc/core/autograd.hpp"
#include "hfttc/core/dataset.hpp"
#include "hfttc/core/dynamics.hpp"
#include "hfttc/core/model.hpp"
#include "hfttc/core/safety.hpp"
#include "hfttc/core/synthetic.hpp"
#include "hfttc/core/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace hfttc;
namespace fs = std::filesystem;
namespace nx = hfttc::numerics;
namespace dyn = hfttc::dynamics;
namespace sa = hfttc::safety;

namespace
{

// Tolerances and budgets.
constexpr double kRk4SlopeTarget = 4.0;
constexpr double kRk4SlopeBand = 0.5;
constexpr double kRk4BudgetS = 1.0;
constexpr double kClosedFormTol = 1e-9;
constexpr double kCircleTol = 1e-4;
constexpr double kModelGradTol = 1e-3;
constexpr double kPrimitiveGradTol = 1e-4;
constexpr double kGradBudgetS = 10.0;
constexpr int kSimplexPasses = 1000;
constexpr double kSimplexTol = 1e-9;
constexpr double kClosureTol = 0.1;
constexpr int kDegenerateScenes = 100;
constexpr double kPermutationTol = 1e-9;
constexpr double kOverfitRatio = 0.01;
constexpr std::size_t kOverfitSteps = 500;
constexpr double kOverfitBudgetS = 60.0;
constexpr std::size_t kCorpusScenes = 200;
constexpr double kAdeGain = 0.20;
constexpr std::uint64_t kAblationSeeds = 3;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char * pattern, double a)
{
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

nx::Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64 & rng)
{
  nx::Tensor t = nx::Tensor::zeros(r, c);
  for (std::size_t i = 0; i < r * c; ++i) {
    t[i] = 2.0 * nx::uniform01(rng) - 1.0;
  }
  return t;
}

/// Decoder weights randomized so that modes and probabilities differ.
nx::ParameterStore lively_parameters(const model::ModelConfig & c, std::uint64_t seed, std::mt19937_64 & rng)
{
  auto p = model::init_parameters(c, seed);
  for (auto & [name, value] : p.entries()) {
    if (name.rfind("decoder", 0) == 0) {
      value = nx::Tensor(value.shape(), random_matrix(value.rows(), value.cols(), rng).data());
    }
  }
  return p;
}

// 1
Outcome rk4_order()
{
  const auto t0 = std::chrono::steady_clock::now();
  const double dts[] = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double dt : dts) {
    errs.push_back(hfttc::testing::rk4_global_error(10.0, 1.0, 0.1, dt, 4.0));
  }
  const double slope = hfttc::testing::log_log_slope(dts, errs);
  const double s = seconds_since(t0);
  return {std::abs(slope - kRk4SlopeTarget) <= kRk4SlopeBand && s < kRk4BudgetS,
    "log-log slope " + fmt("%.3f", slope) + " (target 4.0 +/- 0.5), " + fmt("%.3f", s) + " s (< 1 s)"};
}

// 2
Outcome closed_form_dynamics()
{
  const double alpha = std::numbers::pi / 6;
  const auto r = dyn::rk4_step(
    dyn::VehicleState(0, 0, 0, 10), dyn::ControlInput{0, 0}, dyn::GradientProfile::constant(alpha), 0.0, 0.1);
  const double decel = dyn::kStandardGravity * std::sin(alpha);
  const double ev = std::abs(r.state.speed() - (10.0 - decel * 0.1));
  const double ex = std::abs(r.state.px() - (1.0 - 0.5 * decel * 0.01));

  std::vector<dyn::ControlInput> u(200, dyn::ControlInput{0, 0.2});
  const auto t = dyn::rollout(dyn::VehicleState(0, 0, 0, 10), u, dyn::GradientProfile(), 0.1, 200);
  double circle = 0.0;
  for (const auto & s : t.states) {
    circle = std::max(circle, std::abs(std::hypot(s.px(), s.py() - 50.0) - 50.0));
  }
  return {ev <= kClosedFormTol && ex <= kClosedFormTol && circle <= kCircleTol,
    "slope step v = " + fmt("%.7f", r.state.speed()) + ", p_x = " + fmt("%.8f", r.state.px()) + " (errors " +
      fmt("%.1e", std::max(ev, ex)) + " <= 1e-9); circle deviation " + fmt("%.1e", circle) + " m (<= 1e-4)"};
}

// 3
Outcome gradient_correctness()
{
  const auto t0 = std::chrono::steady_clock::now();
  model::ModelConfig c;
  c.node_dim = 8;
  c.history = 5;
  c.horizon = 4;
  c.modes = 2;
  c.tau = 0.0;
  std::mt19937_64 rng(3);
  const auto scene = hfttc::testing::random_scene(3, 5, 4, rng);
  const model::Model m(c, 7);
  const training::LossConfig lc;
  const auto host = model::ground_truth_hypothesis(scene);
  const auto micro = hfttc::testing::gradient_check(m.parameters(), [&](nx::Tape & t, const auto & w) {
    const auto g = m.forward(t, w, scene, host, model::Phase::train);
    return training::scene_loss(t, g, scene, lc).total;
  });

  double primitive = 0.0;
  std::mt19937_64 prng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + prng() % 5;
    const std::size_t p = 2 + prng() % 5;
    const std::size_t q = 2 + prng() % 5;
    nx::ParameterStore params;
    params.set("x", random_matrix(n, p, prng));
    params.set("W", random_matrix(p, q, prng));
    params.set("b", random_matrix(1, q, prng));
    params.set("gamma", random_matrix(1, q, prng));
    params.set("beta", random_matrix(1, q, prng));
    params.set("u", random_matrix(n, q, prng));
    params.set("z", random_matrix(n, n, prng));
    std::vector<std::uint8_t> mask(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        mask[i * n + j] = (i == j || nx::uniform01(prng) < 0.5) ? 1 : 0;
      }
    }
    const nx::Tensor target = random_matrix(n, q, prng);
    const auto r = hfttc::testing::gradient_check(params, [&](nx::Tape & t, const auto & v) {
      auto h = nx::linear(v.at("x"), v.at("W"), v.at("b"));
      auto hr = nx::relu(h);
      auto ln = nx::layer_norm_rows(h, v.at("gamma"), v.at("beta"));
      auto att = nx::masked_softmax_rows(v.at("z"), mask);
      auto mixed = nx::linear(att, ln);
      auto sm = nx::softmax_rows(v.at("u"));
      auto lsm = nx::log_softmax_rows(v.at("u"));
      const nx::Var parts[] = {mixed, hr};
      auto cat = nx::concat_cols(parts);
      auto left = nx::slice_cols(cat, 0, q);
      auto top = nx::slice_rows(nx::transpose(left), 0, 1);
      auto total = nx::add(nx::sum(nx::mul(sm, lsm)), nx::sum(nx::cosine_similarity(v.at("u"), mixed)));
      total = nx::add(total, nx::scale(nx::sum(nx::l2_norm_rows(v.at("u"))), 0.5));
      total = nx::add(total, nx::sum(nx::squared_error_rows(left, t.constant(target))));
      total = nx::sub(total, nx::sum(nx::mean_rows(top)));
      return nx::add(total, nx::squared_error(hr, t.constant(target)));
    });
    primitive = std::max(primitive, r.max_rel_error);
  }
  const double s = seconds_since(t0);
  return {micro.max_rel_error < kModelGradTol && primitive < kPrimitiveGradTol && s < kGradBudgetS,
    "micro-scene max rel error " + fmt("%.2e", micro.max_rel_error) + " (< 1e-3), primitives " +
      fmt("%.2e", primitive) + " (< 1e-4), " + fmt("%.2f", s) + " s (< 10 s)"};
}

// 4
Outcome simplex_invariants()
{
  model::ModelConfig c;
  c.node_dim = 8;
  c.layers = 2;
  c.modes = 4;
  c.history = 6;
  c.horizon = 5;
  c.tau = 0.2;
  const sa::SafetyThresholds thr{20.0, 4.0, 1.5, 0.1};
  std::mt19937_64 rng(4);
  double worst_attention = 0.0;
  double worst_probability = 0.0;
  double worst_mass = 0.0;
  bool monotone = true;
  std::size_t distributions = 0;
  std::size_t events = 0;
  for (int pass = 0; pass < kSimplexPasses; ++pass) {
    const model::Model m(c, lively_parameters(c, static_cast<std::uint64_t>(pass), rng));
    const auto scene = hfttc::testing::random_scene(2 + static_cast<std::size_t>(pass % 7), c.history, c.horizon, rng);
    const auto pred = m.predict(scene, model::ground_truth_hypothesis(scene), model::Phase::train);
    for (const auto & a : pred.attention) {
      for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
          s += a(i, j);
        }
        worst_attention = std::max(worst_attention, std::abs(s - 1.0));
      }
    }
    const auto host = sa::constant_velocity_trajectory(sa::motion_from_history(scene.past[0]), thr.dt, thr.steps());
    for (std::size_t v = 0; v < pred.ambient.size(); ++v) {
      const auto & ms = pred.ambient[v];
      worst_probability =
        std::max(worst_probability, std::abs(std::accumulate(ms.probabilities.begin(), ms.probabilities.end(), 0.0) - 1.0));
      const auto d = sa::ttc_distribution(host, scene.past[v + 1].back(), ms, thr);
      ++distributions;
      events += d.ttc.atoms.empty() ? 0 : 1;
      worst_mass = std::max({worst_mass, std::abs(d.ttc.total_mass() - 1.0), std::abs(d.ittc.total_mass() - 1.0)});
      double prev = 0.0;
      for (const auto & [t, f] : d.ttc.cdf_samples(thr.dt, thr.horizon)) {
        monotone = monotone && f >= prev;
        prev = f;
      }
    }
  }
  return {worst_attention <= kSimplexTol && worst_probability <= kSimplexTol && worst_mass <= kSimplexTol && monotone,
    std::to_string(kSimplexPasses) + " passes: attention row error " + fmt("%.1e", worst_attention) +
      ", mode probability error " + fmt("%.1e", worst_probability) + ", TTC mass error " + fmt("%.1e", worst_mass) +
      " over " + std::to_string(distributions) + " distributions (" + std::to_string(events) +
      " with events), CDF " + (monotone ? "non-decreasing" : "DECREASES")};
}

// 5
Outcome ttc_oracle()
{
  std::mt19937_64 rng(11);
  const sa::SafetyThresholds thr{5.0, 2.0, 6.0, 0.1};
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * nx::uniform01(rng); };
  auto wobbly = [&] {
    const double x0 = u(-40, 60), y0 = u(-6, 6), vx = u(-15, 15), vy = u(-1.5, 1.5), ay = u(-0.5, 0.5);
    sa::Trajectory t;
    t.dt = thr.dt;
    for (std::size_t k = 0; k <= thr.steps(); ++k) {
      const double s = static_cast<double>(k) * thr.dt;
      t.states.emplace_back(x0 + vx * s, y0 + vy * s + 0.5 * ay * s * s, 0.0, 0.0);
    }
    return t;
  };
  std::size_t mismatches = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    const auto host = wobbly();
    const std::size_t m = 1 + static_cast<std::size_t>(nx::uniform01(rng) * 8.0);
    std::vector<sa::Trajectory> modes;
    std::vector<double> p(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      modes.push_back(wobbly());
      p[i] = 0.05 + nx::uniform01(rng);
      sum += p[i];
    }
    for (auto & v : p) {
      v /= sum;
    }
    const auto d = sa::ttc_distribution(host, modes, p, thr);
    std::map<double, double> atoms;
    double none = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::optional<double> first;
      for (std::size_t k = 1; k <= thr.steps() && !first; ++k) {
        if (std::abs(host.states[k].px() - modes[i].states[k].px()) <= thr.rx &&
            std::abs(host.states[k].py() - modes[i].states[k].py()) <= thr.ry) {
          first = static_cast<double>(k) * thr.dt;
        }
      }
      (first ? atoms[*first] : none) += p[i];
    }
    bool same = d.ttc.atoms.size() == atoms.size() && d.ttc.no_event_mass == none;
    std::size_t j = 0;
    for (const auto & [t, q] : atoms) {
      same = same && j < d.ttc.atoms.size() && d.ttc.atoms[j].value == t && d.ttc.atoms[j].probability == q;
      ++j;
    }
    mismatches += same ? 0 : 1;
  }

  const sa::SafetyThresholds closure{5.0, 2.0, 10.0, 0.1};
  auto closing = [&](double gap) {
    const auto host = sa::constant_velocity_trajectory({{0, 0}, {1.0, 0}}, 0.1, closure.steps());
    const auto stopped = sa::constant_velocity_trajectory({{gap, 0}, {0, 0}}, 0.1, closure.steps());
    return sa::hf_ttc_mode(host, stopped, closure);
  };
  const auto a = closing(50.0);
  const auto b = closing(45.0);
  const bool closed = a && b && std::abs(*a - 4.5) <= kClosureTol && std::abs(*b - 4.0) <= kClosureTol;
  return {mismatches == 0 && closed,
    std::to_string(trials - static_cast<int>(mismatches)) + "/" + std::to_string(trials) +
      " random mode sets equal brute force exactly; closure " + (a ? fmt("%.2f", *a) : std::string("none")) +
      " s vs 4.5, " + (b ? fmt("%.2f", *b) : std::string("none")) + " s vs 4.0 (within 0.1 s)"};
}

// 6
Outcome degenerate_consistency()
{
  synthetic::CorpusConfig cc;
  cc.scenes = kDegenerateScenes;
  cc.seed = 6;
  const auto corpus = synthetic::interacting_corpus(cc);
  const sa::SafetyThresholds thr;
  const sa::ConstantVelocityPredictor cv(thr.steps());
  std::size_t pairs = 0;
  std::size_t equal = 0;
  std::size_t events = 0;
  for (const auto & scene : corpus.scenes) {
    const auto r = sa::scenario_risk(scene, cv, dyn::kAllBehaviorModes, thr);
    for (const auto & p : r.pairs) {
      ++pairs;
      const bool same = p.traditional_ttc
                          ? (p.ttc.atoms.size() == 1 && p.ttc.atoms[0].value == *p.traditional_ttc &&
                              p.ttc.atoms[0].probability == 1.0 && p.ttc.no_event_mass == 0.0)
                          : (p.ttc.atoms.empty() && p.ttc.no_event_mass == 1.0);
      equal += same ? 1 : 0;
      events += p.traditional_ttc ? 1 : 0;
    }
  }
  return {equal == pairs && pairs > 0 && events > 0,
    std::to_string(equal) + "/" + std::to_string(pairs) + " pairs over " + std::to_string(corpus.scenes.size()) +
      " scenes equal traditional TTC (" + std::to_string(events) + " with a collision)"};
}

// 7
Outcome permutation_equivariance()
{
  model::ModelConfig c;
  c.node_dim = 16;
  c.modes = 3;
  c.tau = 0.2;
  std::mt19937_64 rng(12);
  double worst = 0.0;
  bool ids = true;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const model::Model m(c, lively_parameters(c, static_cast<std::uint64_t>(trial), rng));
    const auto scene = hfttc::testing::random_scene(3 + static_cast<std::size_t>(trial % 6), c.history, c.horizon, rng);
    std::vector<std::size_t> perm(scene.ambient_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = permute_ambient(scene, perm);
    const auto host = model::evaluation_hypothesis(scene, dyn::BehaviorMode::average, c);
    const auto a = m.predict(scene, host);
    const auto b = m.predict(shuffled, host);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto & x = a.ambient[perm[i]];
      const auto & y = b.ambient[i];
      ids = ids && x.vehicle_id == y.vehicle_id;
      for (std::size_t mo = 0; mo < x.trajectories.size(); ++mo) {
        worst = std::max(worst, std::abs(x.probabilities[mo] - y.probabilities[mo]));
        for (std::size_t k = 0; k < x.trajectories[mo].size(); ++k) {
          worst = std::max({worst, std::abs(x.trajectories[mo][k].x - y.trajectories[mo][k].x),
            std::abs(x.trajectories[mo][k].y - y.trajectories[mo][k].y)});
        }
      }
    }
  }
  return {worst < kPermutationTol && ids,
    std::to_string(trials) + " random permutations, max deviation " + fmt("%.1e", worst) + " (< 1e-9)"};
}

struct CorpusRun
{
  std::vector<Scene> train;
  std::vector<Scene> test;
  /// Per seed: mean over behavior blocks of RMSE at 50 frames.
  std::map<std::string, std::vector<double>> rmse50;
  double full_ade = 0.0;
  double cv_ade = 0.0;
  double seconds = 0.0;
};

double behavior_mean(const training::EvaluationReport & r, const std::function<double(const training::MetricsReport &)> & f)
{
  double s = 0.0;
  for (auto mode : dyn::kAllBehaviorModes) {
    s += f(r.at(std::string(dyn::to_string(mode))));
  }
  return s / static_cast<double>(std::size(dyn::kAllBehaviorModes));
}

CorpusRun run_corpus()
{
  const auto t0 = std::chrono::steady_clock::now();
  CorpusRun run;
  synthetic::CorpusConfig cc;
  cc.scenes = kCorpusScenes;
  cc.seed = 1;
  const auto corpus = synthetic::interacting_corpus(cc);
  auto sp = data::split(corpus.scenes, data::SplitSpec{});
  run.train = std::move(sp.train);
  run.test = std::move(sp.test);

  for (std::uint64_t seed = 0; seed < kAblationSeeds; ++seed) {
    for (const std::string variant : {"full", "gnn", "deterministic"}) {
      model::ModelConfig mc;
      mc.node_dim = 32;
      mc.gnn = variant == "gnn";
      mc.deterministic = variant == "deterministic";
      model::Model m(mc, seed);
      training::LossConfig lc;
      lc.steps = 600;
      lc.batch_size = 8;
      lc.learning_rate = 1e-3;
      lc.seed = seed;
      training::train(m, run.train, lc);
      const auto rep = training::evaluate(m, run.test, dyn::kAllBehaviorModes);
      run.rmse50[variant].push_back(behavior_mean(rep, [](const auto & x) { return x.rmse_at.at(50); }));
      if (variant == "full") {
        if (seed == 0) {
          run.full_ade = behavior_mean(rep, [](const auto & x) { return x.ade; });
          run.cv_ade = rep.at("traditional").ade;
        }
        // Kinematic ablation: same trained weights, constant-velocity host at evaluation.
        auto kc = mc;
        kc.kinematic = true;
        const model::Model km(kc, m.parameters());
        const auto krep = training::evaluate(km, run.test, dyn::kAllBehaviorModes, false);
        run.rmse50["kinematic"].push_back(behavior_mean(krep, [](const auto & x) { return x.rmse_at.at(50); }));
      }
    }
  }
  run.seconds = seconds_since(t0);
  return run;
}

// 8
Outcome learning_works(const CorpusRun & run)
{
  const auto t0 = std::chrono::steady_clock::now();
  synthetic::CorpusConfig cc;
  cc.scenes = 1;
  cc.seed = 8;
  const auto one = synthetic::interacting_corpus(cc).scenes;
  model::ModelConfig mc;
  mc.node_dim = 32;
  model::Model m(mc, 0);
  training::LossConfig lc;
  lc.steps = kOverfitSteps;
  lc.batch_size = 1;
  const auto log = training::train(m, one, lc);
  const double ratio = log.back().loss / log.front().loss;
  const double s = seconds_since(t0);
  const double gain = 1.0 - run.full_ade / run.cv_ade;
  return {ratio < kOverfitRatio && s < kOverfitBudgetS && gain >= kAdeGain,
    "overfit loss ratio " + fmt("%.2e", ratio) + " after 500 steps (< 1e-2) in " + fmt("%.1f", s) +
      " s (< 60 s); corpus ADE " + fmt("%.3f", run.full_ade) + " m vs constant speed " + fmt("%.3f", run.cv_ade) +
      " m, gain " + fmt("%.1f", 100.0 * gain) + "% (>= 20%); " + std::to_string(run.train.size()) + "/" +
      std::to_string(run.test.size()) + " train/test scenes"};
}

// 9
Outcome ablation_ordering(const CorpusRun & run)
{
  auto mean = [](const std::vector<double> & v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double full = mean(run.rmse50.at("full"));
  bool pass = true;
  std::string detail = "RMSE@50 over " + std::to_string(kAblationSeeds) + " seeds: full " + fmt("%.3f", full);
  for (const std::string v : {"gnn", "deterministic", "kinematic"}) {
    const double x = mean(run.rmse50.at(v));
    pass = pass && full <= x;
    detail += ", " + v + " " + fmt("%.3f", x);
  }
  return {pass, detail + " (" + fmt("%.0f", run.seconds) + " s)"};
}

// 10
Outcome cli_determinism()
{
  using hfttc::testing::fresh_dir;
  using hfttc::testing::run_cli;
  using hfttc::testing::slurp;
  const std::string scenarios = HFTTC_SCENARIO_DIR;
  const std::string common = " --node-dim 8 --layers 1 --modes 2 --seed 5 ";
  const std::vector<std::pair<std::string, std::string>> commands = {
    {"train", "train --data synthetic:12 --steps 5 --batch-size 4" + common},
    {"evaluate", "evaluate --data synthetic:12 --behavior all"},
    {"safety", "safety --data synthetic:12 --max-scenes 2 --traditional"},
    {"scenario", "scenario '" + scenarios + "/lane_change.json' --traditional --seed 5"},
  };
  const auto a = fresh_dir("acceptance_a");
  const auto b = fresh_dir("acceptance_b");
  std::size_t compared = 0;
  std::vector<std::string> failures;
  for (const auto & dir : {a, b}) {
    for (const auto & [name, args] : commands) {
      const auto r = run_cli(args + " --out '" + dir.string() + "'", dir.parent_path() / (dir.filename().string() + "_err"));
      if (r.code != 0) {
        failures.push_back(name + " exited " + std::to_string(r.code));
      }
    }
  }
  for (const auto & e : fs::directory_iterator(a)) {
    const auto ext = e.path().extension();
    if (ext != ".json" && ext != ".csv") {
      continue;
    }
    ++compared;
    if (!fs::exists(b / e.path().filename()) || slurp(e.path()) != slurp(b / e.path().filename())) {
      failures.push_back(e.path().filename().string() + " differs");
    }
  }
  std::string detail = std::to_string(compared) + " JSON/CSV files from train, evaluate, safety and scenario";
  detail += failures.empty() ? " byte-identical across two runs" : "; " + failures.front();
  return {failures.empty() && compared > 0, detail};
}

}  // namespace

int main()
{
  struct Criterion
  {
    int id;
    const char * name;
    std::function<Outcome()> run;
  };
  std::optional<CorpusRun> corpus;
  auto corpus_run = [&]() -> const CorpusRun & {
    if (!corpus) {
      corpus = run_corpus();
    }
    return *corpus;
  };
  const std::vector<Criterion> criteria = {
    {1, "RK4 order", rk4_order},
    {2, "closed-form dynamics", closed_form_dynamics},
    {3, "gradient correctness", gradient_correctness},
    {4, "simplex and distribution invariants", simplex_invariants},
    {5, "TTC oracle equivalence", ttc_oracle},
    {6, "degenerate consistency", degenerate_consistency},
    {7, "permutation equivariance", permutation_equivariance},
    {8, "learning works", [&] { return learning_works(corpus_run()); }},
    {9, "ablation ordering", [&] { return ablation_ordering(corpus_run()); }},
    {10, "CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto & c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception & e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2d [%s] %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
