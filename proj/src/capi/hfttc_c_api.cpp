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

#include "hfttc/hfttc.h"

#include "hfttc/core/dataset.hpp"
#include "hfttc/core/errors.hpp"
#include "hfttc/core/model.hpp"
#include "hfttc/core/safety.hpp"
#include "hfttc/core/synthetic.hpp"
#include "hfttc/core/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

struct hfttc_scenes
{
  std::vector<hfttc::Scene> scenes;
};

struct hfttc_model
{
  explicit hfttc_model(hfttc::model::Model m) : model(std::move(m)) {}
  hfttc::model::Model model;
};

namespace
{

using json = nlohmann::json;
using namespace hfttc;

thread_local std::string g_last_error;

class InvalidArgument : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

template <typename F>
hfttc_status guarded(F && body)
{
  try {
    body();
    g_last_error.clear();
    return HFTTC_OK;
  } catch (const InvalidArgument & e) {
    g_last_error = e.what();
    return HFTTC_ERR_INVALID_ARGUMENT;
  } catch (const ConfigError & e) {
    g_last_error = e.what();
    return HFTTC_ERR_CONFIG;
  } catch (const DataError & e) {
    g_last_error = e.what();
    return HFTTC_ERR_DATA;
  } catch (const NumericError & e) {
    g_last_error = e.what();
    return HFTTC_ERR_NUMERIC;
  } catch (const ContractError & e) {
    g_last_error = e.what();
    return HFTTC_ERR_CONTRACT;
  } catch (const json::exception & e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return HFTTC_ERR_CONFIG;
  } catch (const std::exception & e) {
    g_last_error = e.what();
    return HFTTC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HFTTC_ERR_INTERNAL;
  }
}

void require(const void * p, const char * what)
{
  if (p == nullptr) {
    throw InvalidArgument(std::string(what) + " must not be NULL");
  }
}

char * copy_string(const std::string & s)
{
  auto * out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out == nullptr) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char ** out, const std::string & s)
{
  if (out != nullptr) {
    *out = copy_string(s);
  }
}

json parse_object(const char * text, const char * what)
{
  if (text == nullptr || *text == '\0') {
    return json::object();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError(std::string(what) + " must be a JSON object");
  }
  return doc;
}

void only_keys(const json & doc, std::initializer_list<const char *> keys, const char * what)
{
  for (const auto & [key, value] : doc.items()) {
    bool known = false;
    for (const char * k : keys) {
      known = known || key == k;
    }
    if (!known) {
      throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void take(const json & doc, const char * key, T & target, const char * what)
{
  if (!doc.contains(key)) {
    return;
  }
  const auto & v = doc.at(key);
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else {
    ok = v.is_number_integer() && !(v.is_number_integer() && v.get<std::int64_t>() < 0);
  }
  if (!ok) {
    throw ConfigError(std::string(what) + ": '" + key + "' has the wrong type");
  }
  target = v.get<T>();
}

data::WindowConfig window_config(const char * text)
{
  const auto doc = parse_object(text, "window config");
  only_keys(doc, {"history", "horizon", "stride", "radius", "max_ambient"}, "window config");
  data::WindowConfig w;
  take(doc, "history", w.history, "window config");
  take(doc, "horizon", w.horizon, "window config");
  take(doc, "stride", w.stride, "window config");
  take(doc, "radius", w.radius, "window config");
  take(doc, "max_ambient", w.max_ambient, "window config");
  w.validate();
  return w;
}

training::LossConfig loss_config(const char * text)
{
  const auto doc = parse_object(text, "loss config");
  only_keys(doc, {"lambda", "lr", "steps", "batch_size", "seed", "confidence_loss", "confidence_weight"}, "loss config");
  training::LossConfig c;
  take(doc, "lambda", c.lambda, "loss config");
  take(doc, "lr", c.learning_rate, "loss config");
  take(doc, "steps", c.steps, "loss config");
  take(doc, "batch_size", c.batch_size, "loss config");
  take(doc, "seed", c.seed, "loss config");
  take(doc, "confidence_loss", c.confidence_loss, "loss config");
  take(doc, "confidence_weight", c.confidence_weight, "loss config");
  c.validate();
  return c;
}

safety::SafetyThresholds thresholds(const char * text, double scene_dt)
{
  const auto doc = parse_object(text, "thresholds");
  only_keys(doc, {"rx", "ry", "horizon", "dt"}, "thresholds");
  safety::SafetyThresholds t;
  t.dt = scene_dt;
  take(doc, "rx", t.rx, "thresholds");
  take(doc, "ry", t.ry, "thresholds");
  take(doc, "horizon", t.horizon, "thresholds");
  take(doc, "dt", t.dt, "thresholds");
  t.validate();
  return t;
}

std::vector<dynamics::BehaviorMode> behaviors(const char * text)
{
  const std::string s = text == nullptr ? "all" : text;
  if (s.empty() || s == "all") {
    return {std::begin(dynamics::kAllBehaviorModes), std::end(dynamics::kAllBehaviorModes)};
  }
  std::vector<dynamics::BehaviorMode> out;
  std::stringstream ss(s);
  std::string tag;
  while (std::getline(ss, tag, ',')) {
    try {
      out.push_back(dynamics::parse_behavior_mode(tag));
    } catch (const ContractError &) {
      throw ConfigError("unknown behavior '" + tag + "' (expected last_step, average, self_prediction or all)");
    }
  }
  return out;
}

const Scene & scene_at(const hfttc_scenes * scenes, std::size_t index)
{
  require(scenes, "scenes");
  if (index >= scenes->scenes.size()) {
    throw InvalidArgument("scene index " + std::to_string(index) + " out of range");
  }
  return scenes->scenes[index];
}

json points_json(const std::vector<std::vector<Point2>> & rows)
{
  json out = json::array();
  for (const auto & r : rows) {
    json row = json::array();
    for (const auto & p : r) {
      row.push_back({p.x, p.y});
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

extern "C" {

const char * hfttc_version(void) { return "0.1.0"; }

const char * hfttc_last_error(void) { return g_last_error.c_str(); }

void hfttc_string_free(char * s) { std::free(s); }

hfttc_status hfttc_scenes_load(const char * path, const char * window_json, hfttc_scenes ** out, char ** stats_json)
{
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    const std::string p = path;
    const auto ext = std::filesystem::path(p).extension().string();
    auto set = std::make_unique<hfttc_scenes>();
    nlohmann::ordered_json stats;
    if (ext == ".hfsc") {
      set->scenes = data::read_scene_cache(p);
      stats["recordings"] = nullptr;
    } else if (ext == ".json") {
      std::ifstream in(p);
      if (!in) {
        throw DataError("cannot open '" + p + "'");
      }
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error & e) {
        throw DataError("'" + p + "' is not valid JSON: " + e.what());
      }
      set->scenes.push_back(synthetic::synth_scenario(synthetic::ScenarioSpec::from_json(doc)));
      stats["recordings"] = 1;
    } else {
      const auto window = window_config(window_json);
      const auto recordings = data::load_recordings(p);
      data::BuildStats bs;
      set->scenes = data::build_scenes(recordings, window, &bs);
      stats["recordings"] = recordings.size();
      stats["windows"] = bs.windows;
      stats["skipped"] = bs.skipped;
      stats["dropped_neighbors"] = bs.dropped_neighbors;
    }
    stats["scenes"] = set->scenes.size();
    emit(stats_json, stats.dump());
    *out = set.release();
  });
}

hfttc_status hfttc_scenes_from_scenario(const char * spec_json, double snapshot_interval, hfttc_scenes ** out)
{
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out, "out");
    *out = nullptr;
    const auto spec = synthetic::ScenarioSpec::from_json(parse_object(spec_json, "scenario spec"));
    auto set = std::make_unique<hfttc_scenes>();
    if (snapshot_interval > 0.0) {
      set->scenes = synthetic::snapshot_series(spec, snapshot_interval);
    } else {
      set->scenes.push_back(synthetic::synth_scenario(spec));
    }
    *out = set.release();
  });
}

hfttc_status hfttc_scenes_synthetic_corpus(
  size_t count, uint64_t seed, size_t history, size_t horizon, hfttc_scenes ** out)
{
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    synthetic::CorpusConfig cfg;
    cfg.scenes = count;
    cfg.seed = seed;
    cfg.history = history;
    cfg.horizon = horizon;
    auto set = std::make_unique<hfttc_scenes>();
    set->scenes = synthetic::interacting_corpus(cfg).scenes;
    *out = set.release();
  });
}

hfttc_status hfttc_scenes_split(const hfttc_scenes * scenes, double train_fraction, uint64_t seed,
  hfttc_scenes ** train, hfttc_scenes ** test, char ** warning)
{
  return guarded([&] {
    require(scenes, "scenes");
    require(train, "train");
    require(test, "test");
    *train = nullptr;
    *test = nullptr;
    auto sp = data::split(scenes->scenes, {train_fraction, seed, true});
    auto a = std::make_unique<hfttc_scenes>();
    auto b = std::make_unique<hfttc_scenes>();
    a->scenes = std::move(sp.train);
    b->scenes = std::move(sp.test);
    if (warning != nullptr) {
      *warning = sp.warning ? copy_string(*sp.warning) : nullptr;
    }
    *train = a.release();
    *test = b.release();
  });
}

hfttc_status hfttc_scenes_subset(
  const hfttc_scenes * scenes, const size_t * indices, size_t count, hfttc_scenes ** out)
{
  return guarded([&] {
    require(scenes, "scenes");
    require(out, "out");
    *out = nullptr;
    if (count > 0) {
      require(indices, "indices");
    }
    auto set = std::make_unique<hfttc_scenes>();
    for (size_t i = 0; i < count; ++i) {
      set->scenes.push_back(scene_at(scenes, indices[i]));
    }
    *out = set.release();
  });
}

hfttc_status hfttc_scenes_save_cache(const hfttc_scenes * scenes, const char * path)
{
  return guarded([&] {
    require(scenes, "scenes");
    require(path, "path");
    data::write_scene_cache(path, scenes->scenes);
  });
}

size_t hfttc_scenes_count(const hfttc_scenes * scenes) { return scenes == nullptr ? 0 : scenes->scenes.size(); }

hfttc_status hfttc_scenes_id(const hfttc_scenes * scenes, size_t index, char ** out)
{
  return guarded([&] {
    require(out, "out");
    *out = copy_string(scene_at(scenes, index).id);
  });
}

hfttc_status hfttc_scenes_to_json(const hfttc_scenes * scenes, size_t index, char ** out)
{
  return guarded([&] {
    require(out, "out");
    const auto & s = scene_at(scenes, index);
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["recording"] = s.recording;
    j["host_id"] = s.host_id;
    j["ambient_ids"] = s.ambient_ids;
    j["dt"] = s.dt;
    j["origin"] = {s.origin.x, s.origin.y};
    j["rotation"] = s.rotation;
    j["anchor_frame"] = s.anchor_frame;
    j["past"] = points_json(s.past);
    j["future"] = points_json(s.future);
    *out = copy_string(j.dump());
  });
}

void hfttc_scenes_free(hfttc_scenes * scenes) { delete scenes; }

hfttc_status hfttc_scenario_write_csv(const char * spec_json, const char * path)
{
  return guarded([&] {
    require(spec_json, "spec_json");
    require(path, "path");
    const auto spec = synthetic::ScenarioSpec::from_json(parse_object(spec_json, "scenario spec"));
    const auto rec = synthetic::simulate(spec);
    std::ofstream out(path);
    if (!out) {
      throw DataError(std::string("cannot write '") + path + "'");
    }
    data::write_trajectories_csv(rec, out);
  });
}

hfttc_status hfttc_model_create(const char * config_json, uint64_t seed, hfttc_model ** out)
{
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto config = model::ModelConfig::from_json(parse_object(config_json, "model config"));
    *out = new hfttc_model(model::Model(config, seed));
  });
}

hfttc_status hfttc_model_load(
  const char * path, const char * expected_json, const char * overrides_json, hfttc_model ** out)
{
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto m = model::Model::load(path, parse_object(expected_json, "expected config"));
    const auto overrides = parse_object(overrides_json, "overrides");
    only_keys(overrides, {"kinematic"}, "overrides");
    if (overrides.contains("kinematic")) {
      auto cfg = m.config();
      take(overrides, "kinematic", cfg.kinematic, "overrides");
      m = model::Model(cfg, m.parameters());
    }
    *out = new hfttc_model(std::move(m));
  });
}

hfttc_status hfttc_model_save(const hfttc_model * model, const char * path)
{
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->model.save(path);
  });
}

hfttc_status hfttc_model_config(const hfttc_model * model, char ** out_json)
{
  return guarded([&] {
    require(model, "model");
    require(out_json, "out_json");
    *out_json = copy_string(model->model.config().to_json().dump());
  });
}

hfttc_status hfttc_model_train(hfttc_model * model, const hfttc_scenes * scenes, const char * loss_json, char ** log_csv)
{
  return guarded([&] {
    require(model, "model");
    require(scenes, "scenes");
    const auto cfg = loss_config(loss_json);
    const auto log = training::train(model->model, scenes->scenes, cfg);
    emit(log_csv, training::train_log_csv(log));
  });
}

hfttc_status hfttc_model_evaluate(const hfttc_model * model, const hfttc_scenes * scenes, const char * behavior_list,
  int baseline, char ** metrics_json, char ** rmse_csv)
{
  return guarded([&] {
    require(model, "model");
    require(scenes, "scenes");
    const auto modes = behaviors(behavior_list);
    const auto report = training::evaluate(model->model, scenes->scenes, modes, baseline != 0);
    emit(metrics_json, report.to_json().dump(2));
    emit(rmse_csv, report.rmse_table_csv());
  });
}

hfttc_status hfttc_model_predict(
  const hfttc_model * model, const hfttc_scenes * scenes, size_t index, const char * behavior, char ** out_json)
{
  return guarded([&] {
    require(model, "model");
    require(out_json, "out_json");
    const auto & scene = scene_at(scenes, index);
    const auto modes = behaviors(behavior);
    if (modes.size() != 1) {
      throw ConfigError("prediction needs exactly one behavior");
    }
    const auto hyp = model::evaluation_hypothesis(scene, modes[0], model->model.config());
    const auto pred = model->model.predict(scene, hyp);
    nlohmann::ordered_json j;
    j["scene"] = scene.id;
    j["behavior"] = dynamics::to_string(modes[0]);
    j["ambient"] = nlohmann::ordered_json::array();
    for (const auto & ms : pred.ambient) {
      nlohmann::ordered_json a;
      a["vehicle_id"] = ms.vehicle_id;
      a["probabilities"] = ms.probabilities;
      a["trajectories"] = points_json(ms.trajectories);
      j["ambient"].push_back(std::move(a));
    }
    *out_json = copy_string(j.dump());
  });
}

void hfttc_model_free(hfttc_model * model) { delete model; }

hfttc_status hfttc_scenario_risk(const hfttc_model * model, const hfttc_scenes * scenes, size_t index,
  const char * thresholds_json, const char * behavior_list, char ** report_json)
{
  return guarded([&] {
    require(report_json, "report_json");
    const auto & scene = scene_at(scenes, index);
    const auto thr = thresholds(thresholds_json, scene.dt);
    const auto modes = behaviors(behavior_list);
    std::unique_ptr<safety::Predictor> predictor;
    if (model != nullptr) {
      predictor = std::make_unique<safety::NetworkPredictor>(model->model);
    } else {
      predictor = std::make_unique<safety::ConstantVelocityPredictor>(thr.steps());
    }
    const auto report = safety::scenario_risk(scene, *predictor, modes, thr);
    *report_json = copy_string(report.to_json().dump(2));
  });
}

hfttc_status hfttc_risk_cdf_csv(const char * report_json, size_t pair, char ** out_csv)
{
  return guarded([&] {
    require(report_json, "report_json");
    require(out_csv, "out_csv");
    json doc;
    try {
      doc = json::parse(report_json);
    } catch (const json::parse_error & e) {
      throw DataError(std::string("risk report is not valid JSON: ") + e.what());
    }
    const auto report = safety::RiskReport::from_json(doc);
    if (pair >= report.pairs.size()) {
      throw InvalidArgument("pair index " + std::to_string(pair) + " out of range");
    }
    std::string csv = "t,F(t)\n";
    char buf[64];
    for (const auto & [t, f] : report.pairs[pair].ttc.cdf_samples(report.thresholds.dt, report.thresholds.horizon)) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, f);
      csv += buf;
    }
    *out_csv = copy_string(csv);
  });
}

}  // extern "C"
