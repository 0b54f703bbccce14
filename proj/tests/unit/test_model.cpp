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

#include "gradcheck.hpp"
#include "scenes.hpp"

#include "hfttc/core/errors.hpp"
#include "hfttc/core/model.hpp"
#include "hfttc/core/training.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

using namespace hfttc;
using model::Model;
using model::ModelConfig;
using model::Phase;
using numerics::Tape;
using numerics::Tensor;

namespace
{

ModelConfig small_config()
{
  ModelConfig c;
  c.node_dim = 8;
  c.layers = 2;
  c.modes = 3;
  c.history = 6;
  c.horizon = 5;
  c.tau = 0.2;
  return c;
}

model::Weights constants(Tape & tape, const numerics::ParameterStore & p)
{
  model::Weights w;
  for (const auto & [name, value] : p.entries()) {
    w.emplace(name, tape.constant(value));
  }
  return w;
}

numerics::ParameterStore zeroed(numerics::ParameterStore p)
{
  for (auto & [name, value] : p.entries()) {
    value = Tensor(value.shape());
  }
  return p;
}

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64 & rng)
{
  Tensor t = Tensor::zeros(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      t(i, j) = 2.0 * numerics::uniform01(rng) - 1.0;
    }
  }
  return t;
}

double max_abs_diff(const Tensor & a, const Tensor & b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
    }
  }
  return m;
}

Scene scene_for(const ModelConfig & c, std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  return hfttc::testing::random_scene(n, c.history, c.horizon, rng);
}

}  // namespace

TEST(ModelConfig, ValidationAndJson)
{
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.ffn_width(), 256u);
  EXPECT_EQ(ModelConfig::from_json(c.to_json()), c);
  ModelConfig bad = c;
  bad.modes = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.tau = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto j = c.to_json();
  j["unknown"] = 1;
  EXPECT_THROW(ModelConfig::from_json(j), ConfigError);
  j = c.to_json();
  j["modes"] = "five";
  EXPECT_THROW(ModelConfig::from_json(j), ConfigError);
}

TEST(ModelConfig, DeterministicAblationUsesOneMode)
{
  ModelConfig c;
  c.deterministic = true;
  EXPECT_EQ(c.mode_count(), 1u);
}

TEST(EmbedHistory, IdenticalHistoriesGiveIdenticalRows)
{
  const auto c = small_config();
  auto scene = scene_for(c, 3, 1);
  scene.past[2] = scene.past[1];
  const Model m(c, 4);
  Tape tape;
  const auto w = constants(tape, m.parameters());
  const auto n0 = model::embed_history(w, tape.constant(model::history_matrix(scene, c.input_scale)), c).value();
  for (std::size_t j = 0; j < n0.cols(); ++j) {
    EXPECT_EQ(n0(1, j), n0(2, j));
  }
}

TEST(EmbedHistory, ZeroParametersGiveZeroFeatures)
{
  const auto c = small_config();
  const auto scene = scene_for(c, 3, 2);
  const auto p = zeroed(model::init_parameters(c, 1));
  Tape tape;
  const auto w = constants(tape, p);
  const auto n0 = model::embed_history(w, tape.constant(model::history_matrix(scene, c.input_scale)), c).value();
  EXPECT_EQ(max_abs_diff(n0, Tensor::zeros(n0.rows(), n0.cols())), 0.0);
}

TEST(EmbedHistory, DeterministicAcrossRuns)
{
  const auto c = small_config();
  const auto scene = scene_for(c, 4, 3);
  auto run = [&] {
    const Model m(c, 99);
    Tape tape;
    const auto w = constants(tape, m.parameters());
    return model::embed_history(w, tape.constant(model::history_matrix(scene, c.input_scale)), c).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(EmbedHistory, WrongWindowLength)
{
  const auto c = small_config();
  const Model m(c, 1);
  Tape tape;
  const auto w = constants(tape, m.parameters());
  EXPECT_THROW(model::embed_history(w, tape.constant(Tensor::zeros(3, 2 * c.history + 2)), c), ContractError);
}

TEST(EmbedHost, PhaseDoesNotChangeTheFunction)
{
  const auto c = small_config();
  const auto scene = scene_for(c, 2, 4);
  const Model m(c, 5);
  Tape tape;
  const auto w = constants(tape, m.parameters());
  const auto truth = model::ground_truth_hypothesis(scene);
  auto rollout = truth;
  rollout.source = model::HostSource::behavior_rollout;
  const auto a = model::embed_host(tape, w, truth, Phase::train, c).value();
  const auto b = model::embed_host(tape, w, rollout, Phase::eval, c).value();
  EXPECT_EQ(a, b);
}

TEST(EmbedHost, StrictPhaseChecks)
{
  const auto c = small_config();
  const auto scene = scene_for(c, 2, 5);
  const Model m(c, 5);
  Tape tape;
  const auto w = constants(tape, m.parameters());
  const auto truth = model::ground_truth_hypothesis(scene);
  EXPECT_THROW(model::embed_host(tape, w, truth, Phase::eval, c), ContractError);
  EXPECT_NO_THROW(model::embed_host(tape, w, truth, Phase::eval, c, false));
  const auto hyp = model::behavior_hypothesis(scene, dynamics::BehaviorMode::average, c.horizon);
  EXPECT_THROW(model::embed_host(tape, w, hyp, Phase::train, c), ContractError);
  auto short_hyp = hyp;
  short_hyp.trajectory.pop_back();
  EXPECT_THROW(model::embed_host(tape, w, short_hyp, Phase::eval, c), ContractError);
}

TEST(EmbedHost, ZeroTrajectoryZeroBias)
{
  const auto c = small_config();
  auto p = model::init_parameters(c, 3);
  for (auto & [name, value] : p.entries()) {
    if (name.rfind("host.", 0) == 0 && name.find("bias") != std::string::npos) {
      value = Tensor(value.shape());
    }
  }
  model::HostHypothesis h;
  h.trajectory.assign(c.horizon, Point2{});
  Tape tape;
  const auto w = constants(tape, p);
  const auto z = model::embed_host(tape, w, h, Phase::train, c).value();
  EXPECT_EQ(max_abs_diff(z, Tensor::zeros(z.rows(), z.cols())), 0.0);
}

TEST(EmbedHost, BehaviorHypothesesAreDistinct)
{
  ModelConfig c = small_config();
  c.history = 30;
  c.horizon = 50;
  std::mt19937_64 rng(17);
  Scene scene = hfttc::testing::random_scene(3, 30, 50, rng);
  // Host with a braking then accelerating history so the three modes disagree.
  for (std::size_t k = 0; k < 30; ++k) {
    const double t = 0.1 * static_cast<double>(k) - 2.9;
    const double speed = 15.0 + 2.0 * std::sin(1.3 * t);
    scene.past[0][k] = {speed * t, 0.3 * std::sin(0.8 * t) * t};
  }
  const Model m(c, 8);
  std::vector<Tensor> zs;
  for (const auto mode : dynamics::kAllBehaviorModes) {
    const auto hyp = model::behavior_hypothesis(scene, mode, c.horizon);
    Tape tape;
    const auto w = constants(tape, m.parameters());
    zs.push_back(model::embed_host(tape, w, hyp, Phase::eval, c).value());
  }
  EXPECT_GT(max_abs_diff(zs[0], zs[1]), 0.0);
  EXPECT_GT(max_abs_diff(zs[0], zs[2]), 0.0);
  EXPECT_GT(max_abs_diff(zs[1], zs[2]), 0.0);
}

TEST(HyperedgeInit, MeanOfMembers)
{
  Tape tape;
  const auto nodes = tape.constant(Tensor::matrix({{1, 0}, {0, 1}, {3, -2}, {-3, 2}}));
  hypergraph::BinaryMatrix inc(4, 3);
  inc(0, 0) = inc(1, 0) = 1;
  inc(2, 1) = inc(3, 1) = 1;
  inc(2, 2) = 1;
  const auto groups = hypergraph::groups_from_incidence(inc);
  const auto h = model::init_hyperedge_features(tape, nodes, groups).value();
  EXPECT_EQ(h(0, 0), 0.5);
  EXPECT_EQ(h(0, 1), 0.5);
  EXPECT_EQ(h(1, 0), 0.0);
  EXPECT_EQ(h(1, 1), 0.0);
  EXPECT_EQ(h(2, 0), 3.0);
  EXPECT_EQ(h(2, 1), -2.0);
}

TEST(TransformerLayer, AttentionRowsSumToOne)
{
  const auto c = small_config();
  const Model m(c, 2);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    const auto w = constants(tape, m.parameters());
    const auto nodes = tape.constant(random_tensor(5, c.node_dim, rng));
    const auto topo = model::infer_scene_topology(nodes.value(), c);
    numerics::Var edges;
    if (topo.groups.edge_count() > 0) {
      edges = model::init_hyperedge_features(tape, nodes, topo.groups);
    }
    const auto out = model::transformer_layer(tape, w, 0, nodes, edges, topo.groups, c);
    for (std::size_t i = 0; i < out.attention.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < out.attention.cols(); ++j) {
        EXPECT_GE(out.attention(i, j), 0.0);
        s += out.attention(i, j);
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(TransformerLayer, SingleNodeAttendsToItself)
{
  const auto c = small_config();
  const Model m(c, 2);
  std::mt19937_64 rng(4);
  Tape tape;
  const auto w = constants(tape, m.parameters());
  const auto nodes = tape.constant(random_tensor(1, c.node_dim, rng));
  const auto groups = hypergraph::singleton_groups(1);
  const auto edges = model::init_hyperedge_features(tape, nodes, groups);
  const auto out = model::transformer_layer(tape, w, 0, nodes, edges, groups, c);
  ASSERT_EQ(out.attention.rows(), 1u);
  EXPECT_EQ(out.attention(0, 0), 1.0);
}

TEST(TransformerLayer, SingletonGroupsDecoupleNodes)
{
  const auto c = small_config();
  const Model m(c, 6);
  std::mt19937_64 rng(5);
  const Tensor base = random_tensor(4, c.node_dim, rng);
  Tensor bumped = base;
  for (std::size_t j = 0; j < c.node_dim; ++j) {
    bumped(0, j) += 0.3 * (2.0 * numerics::uniform01(rng) - 1.0);
  }
  auto run = [&](const Tensor & x) {
    Tape tape;
    const auto w = constants(tape, m.parameters());
    const auto nodes = tape.constant(x);
    const auto groups = hypergraph::singleton_groups(4);
    const auto edges = model::init_hyperedge_features(tape, nodes, groups);
    auto out = model::transformer_layer(tape, w, 0, nodes, edges, groups, c);
    return std::make_pair(out.nodes.value(), out.edges.value());
  };
  const auto [n1, e1] = run(base);
  const auto [n2, e2] = run(bumped);
  EXPECT_GT(max_abs_diff(n1, n2), 0.0);
  for (std::size_t i = 1; i < 4; ++i) {
    for (std::size_t j = 0; j < c.node_dim; ++j) {
      EXPECT_EQ(n1(i, j), n2(i, j));
      EXPECT_EQ(e1(i, j), e2(i, j));
    }
  }
}

TEST(DecodeModes, ZeroInitializedLogitsGiveUniformProbabilities)
{
  const auto c = small_config();
  const Model m(c, 3);
  const auto scene = scene_for(c, 4, 6);
  const auto p = m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
  for (const auto & ms : p.ambient) {
    ASSERT_EQ(ms.probabilities.size(), c.modes);
    for (double q : ms.probabilities) {
      EXPECT_NEAR(q, 1.0 / static_cast<double>(c.modes), 1e-15);
    }
  }
}

TEST(DecodeModes, DeterministicAblationSingleMode)
{
  auto c = small_config();
  c.deterministic = true;
  const Model m(c, 3);
  const auto scene = scene_for(c, 3, 7);
  const auto p = m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
  for (const auto & ms : p.ambient) {
    ASSERT_EQ(ms.trajectories.size(), 1u);
    EXPECT_EQ(ms.probabilities[0], 1.0);
  }
}

TEST(DecodeModes, ZeroParametersStayPut)
{
  const auto c = small_config();
  const Model m(c, zeroed(model::init_parameters(c, 1)));
  const auto scene = scene_for(c, 3, 8);
  const auto p = m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
  for (std::size_t i = 0; i < p.ambient.size(); ++i) {
    for (const auto & traj : p.ambient[i].trajectories) {
      for (const auto & q : traj) {
        EXPECT_EQ(q, scene.past[i + 1].back());
      }
    }
  }
}

TEST(Predict, HostOnlySceneHasNoModeSets)
{
  const auto c = small_config();
  const Model m(c, 1);
  const auto scene = scene_for(c, 1, 9);
  EXPECT_TRUE(m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train).ambient.empty());
}

TEST(Predict, SimplexAndShapesOnRandomParameters)
{
  const auto c = small_config();
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 25; ++trial) {
    auto p = model::init_parameters(c, static_cast<std::uint64_t>(trial));
    for (auto & [name, value] : p.entries()) {
      if (name.find("fc2") != std::string::npos && name.rfind("decoder", 0) == 0) {
        value = Tensor(value.shape(), random_tensor(value.rows(), value.cols(), rng).data());
      }
    }
    const Model m(c, p);
    const auto scene = scene_for(c, 2 + static_cast<std::size_t>(trial % 5), 100 + static_cast<std::uint64_t>(trial));
    const auto pred = m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
    ASSERT_EQ(pred.ambient.size(), scene.ambient_count());
    for (const auto & ms : pred.ambient) {
      double s = 0.0;
      for (double q : ms.probabilities) {
        EXPECT_GT(q, 0.0);
        s += q;
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
      for (const auto & t : ms.trajectories) {
        EXPECT_EQ(t.size(), c.horizon);
      }
    }
    for (const auto & a : pred.attention) {
      for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
          s += a(i, j);
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
      }
    }
  }
}

TEST(Predict, DeterministicAcrossRuns)
{
  const auto c = small_config();
  const auto scene = scene_for(c, 4, 11);
  auto run = [&] {
    const Model m(c, 42);
    return m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.ambient.size(), b.ambient.size());
  for (std::size_t i = 0; i < a.ambient.size(); ++i) {
    EXPECT_EQ(a.ambient[i].trajectories, b.ambient[i].trajectories);
    EXPECT_EQ(a.ambient[i].probabilities, b.ambient[i].probabilities);
  }
}

TEST(Predict, PermutationEquivariance)
{
  auto c = small_config();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = model::init_parameters(c, static_cast<std::uint64_t>(trial));
    for (auto & [name, value] : p.entries()) {
      if (name.rfind("decoder", 0) == 0) {
        value = Tensor(value.shape(), random_tensor(value.rows(), value.cols(), rng).data());
      }
    }
    const Model m(c, p);
    const auto scene = scene_for(c, 5, 200 + static_cast<std::uint64_t>(trial));
    std::vector<std::size_t> perm(scene.ambient_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = permute_ambient(scene, perm);
    const auto host = model::ground_truth_hypothesis(scene);
    const auto a = m.predict(scene, host, Phase::train);
    const auto b = m.predict(shuffled, host, Phase::train);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto & x = a.ambient[perm[i]];
      const auto & y = b.ambient[i];
      EXPECT_EQ(x.vehicle_id, y.vehicle_id);
      for (std::size_t mo = 0; mo < x.trajectories.size(); ++mo) {
        EXPECT_NEAR(x.probabilities[mo], y.probabilities[mo], 1e-9);
        for (std::size_t k = 0; k < x.trajectories[mo].size(); ++k) {
          EXPECT_NEAR(x.trajectories[mo][k].x, y.trajectories[mo][k].x, 1e-9);
          EXPECT_NEAR(x.trajectories[mo][k].y, y.trajectories[mo][k].y, 1e-9);
        }
      }
    }
  }
}

TEST(Predict, GnnAblationUsesPairwiseEdges)
{
  auto c = small_config();
  c.gnn = true;
  c.tau = -1.0;
  const Model m(c, 1);
  const auto scene = scene_for(c, 4, 13);
  const auto p = m.predict(scene, model::ground_truth_hypothesis(scene), Phase::train);
  ASSERT_EQ(p.topology.groups.edge_count(), 6u);
  for (const auto & e : p.topology.groups.members) {
    EXPECT_EQ(e.size(), 2u);
  }
}

TEST(Predict, KinematicAblationUsesConstantVelocityHost)
{
  auto c = small_config();
  c.kinematic = true;
  const auto scene = scene_for(c, 3, 14);
  const auto h = model::evaluation_hypothesis(scene, dynamics::BehaviorMode::self_prediction, c);
  EXPECT_EQ(h.source, model::HostSource::constant_velocity);
  EXPECT_EQ(h.trajectory, model::constant_velocity_hypothesis(scene, c.horizon).trajectory);
}

TEST(Gradients, MicroSceneMatchesFiniteDifferences)
{
  ModelConfig c;
  c.node_dim = 8;
  c.history = 5;
  c.horizon = 4;
  c.modes = 2;
  c.tau = 0.0;
  std::mt19937_64 rng(3);
  const auto scene = hfttc::testing::random_scene(3, 5, 4, rng);
  const Model m(c, 7);
  training::LossConfig lc;
  const auto host = model::ground_truth_hypothesis(scene);
  const auto r = hfttc::testing::gradient_check(m.parameters(), [&](Tape & t, const auto & w) {
    const auto g = m.forward(t, w, scene, host, Phase::train);
    return training::scene_loss(t, g, scene, lc).total;
  });
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(Checkpoint, RoundTripAndSidecarCheck)
{
  const auto c = small_config();
  const Model m(c, 21);
  const auto dir = std::filesystem::temp_directory_path() / "hfttc_model_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ckpt.json").string();
  m.save(path);
  EXPECT_TRUE(std::filesystem::exists(model::sidecar_path(path)));
  const auto back = Model::load(path);
  EXPECT_EQ(back.config(), c);
  EXPECT_EQ(back.parameters(), m.parameters());
  EXPECT_NO_THROW(Model::load(path, {{"modes", 3}, {"node_dim", 8}}));
  EXPECT_THROW(Model::load(path, {{"modes", 5}}), ConfigError);
  std::filesystem::remove(model::sidecar_path(path));
  EXPECT_THROW(Model::load(path), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, ShapeMismatchRejected)
{
  auto c = small_config();
  const auto p = model::init_parameters(c, 1);
  c.node_dim = 16;
  EXPECT_THROW(Model(c, p), ConfigError);
}

TEST(SidecarPath, ReplacesJsonExtension)
{
  EXPECT_EQ(model::sidecar_path("a/b/model.json"), "a/b/model.hparams.json");
  EXPECT_EQ(model::sidecar_path("model.bin"), "model.bin.hparams.json");
}
