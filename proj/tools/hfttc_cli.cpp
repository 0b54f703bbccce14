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

#include "run_config.hpp"
#include "svg_plot.hpp"

#include "hfttc/hfttc.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace
{

namespace fs = std::filesystem;
using json = nlohmann::json;
using hfttc::cli::RunOptions;
using hfttc::cli::UsageError;

/// Status code carried out of a failed library call.
class ApiError : public std::runtime_error
{
public:
  ApiError(hfttc_status s, const std::string & what) : std::runtime_error(what), status(s) {}
  hfttc_status status;
};

/// Local I/O failures map to the data exit code.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

void check(hfttc_status s)
{
  if (s != HFTTC_OK) {
    throw ApiError(s, hfttc_last_error());
  }
}

struct ScenesDeleter
{
  void operator()(hfttc_scenes * s) const { hfttc_scenes_free(s); }
};
struct ModelDeleter
{
  void operator()(hfttc_model * m) const { hfttc_model_free(m); }
};
using Scenes = std::unique_ptr<hfttc_scenes, ScenesDeleter>;
using Model = std::unique_ptr<hfttc_model, ModelDeleter>;

std::string take(char * s)
{
  std::string out = s == nullptr ? "" : s;
  hfttc_string_free(s);
  return out;
}

void write_file(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const RunOptions & o)
{
  const fs::path dir = hfttc::cli::output_dir(o);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
  return dir;
}

std::string sanitize(const std::string & s)
{
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  }
  return out;
}

json scene_json(const hfttc_scenes * s, std::size_t i)
{
  char * text = nullptr;
  check(hfttc_scenes_to_json(s, i, &text));
  return json::parse(take(text));
}

std::string scene_id(const hfttc_scenes * s, std::size_t i)
{
  char * text = nullptr;
  check(hfttc_scenes_id(s, i, &text));
  return take(text);
}

Scenes load_data(const RunOptions & o)
{
  if (!o.data) {
    throw UsageError("--data is required");
  }
  const std::string & src = *o.data;
  hfttc_scenes * raw = nullptr;
  if (src.rfind("synthetic:", 0) == 0) {
    std::size_t count = 0;
    std::uint64_t seed = 1;
    const std::string rest = src.substr(10);
    try {
      const auto colon = rest.find(':');
      count = std::stoul(rest.substr(0, colon));
      if (colon != std::string::npos) {
        seed = std::stoull(rest.substr(colon + 1));
      }
    } catch (const std::exception &) {
      throw UsageError("--data synthetic:<count>[:<seed>] expected, got '" + src + "'");
    }
    check(hfttc_scenes_synthetic_corpus(count, seed, o.history.value_or(30), o.future.value_or(50), &raw));
    return Scenes(raw);
  }
  json window = json::object();
  if (o.history) window["history"] = *o.history;
  if (o.future) window["horizon"] = *o.future;
  if (o.stride) window["stride"] = *o.stride;
  if (o.radius) window["radius"] = *o.radius;
  if (o.max_ambient) window["max_ambient"] = *o.max_ambient;
  char * stats = nullptr;
  check(hfttc_scenes_load(src.c_str(), window.dump().c_str(), &raw, &stats));
  take(stats);
  return Scenes(raw);
}

/// Applies --split, --scene and --max-scenes.
Scenes select_scenes(Scenes all, const RunOptions & o, const std::string & default_split)
{
  const std::string split = o.split.value_or(default_split);
  if (split != "train" && split != "test" && split != "all") {
    throw UsageError("--split must be train, test or all");
  }
  Scenes chosen;
  if (split == "all") {
    chosen = std::move(all);
  } else if (hfttc_scenes_count(all.get()) < 2) {
    std::cerr << "warning: fewer than two scenes, using all of them instead of the " << split << " split\n";
    chosen = std::move(all);
  } else {
    hfttc_scenes * train = nullptr;
    hfttc_scenes * test = nullptr;
    char * warning = nullptr;
    check(hfttc_scenes_split(all.get(), o.train_fraction.value_or(0.7), o.split_seed.value_or(0), &train, &test,
      &warning));
    Scenes tr(train);
    Scenes te(test);
    if (warning != nullptr) {
      std::cerr << "warning: " << take(warning) << '\n';
    }
    chosen = split == "train" ? std::move(tr) : std::move(te);
  }

  std::vector<std::size_t> keep;
  const std::size_t n = hfttc_scenes_count(chosen.get());
  for (std::size_t i = 0; i < n; ++i) {
    if (!o.scene || scene_id(chosen.get(), i) == *o.scene) {
      keep.push_back(i);
    }
  }
  if (o.scene && keep.empty()) {
    throw UsageError("no scene with id '" + *o.scene + "'");
  }
  if (o.max_scenes && keep.size() > *o.max_scenes) {
    keep.resize(*o.max_scenes);
  }
  if (keep.empty()) {
    throw ApiError(HFTTC_ERR_DATA, "no scenes to work on");
  }
  if (keep.size() == n) {
    return chosen;
  }
  hfttc_scenes * sub = nullptr;
  check(hfttc_scenes_subset(chosen.get(), keep.data(), keep.size(), &sub));
  return Scenes(sub);
}

fs::path checkpoint_for_write(const RunOptions & o, const fs::path & out)
{
  const fs::path p = o.checkpoint.value_or("model.json");
  return p.is_absolute() ? p : out / p;
}

/// Relative paths are looked up under the output directory first.
std::optional<fs::path> checkpoint_for_read(const RunOptions & o, const fs::path & out)
{
  const fs::path p = o.checkpoint.value_or("model.json");
  if (p.is_absolute()) {
    return p;
  }
  if (fs::exists(out / p)) {
    return out / p;
  }
  if (o.checkpoint && fs::exists(p)) {
    return p;
  }
  if (o.checkpoint) {
    return out / p;
  }
  return std::nullopt;
}

json structural_expectations(const RunOptions & o)
{
  json e = json::object();
  if (o.tau) e["tau"] = *o.tau;
  if (o.modes) e["modes"] = *o.modes;
  if (o.node_dim) e["node_dim"] = *o.node_dim;
  if (o.layers) e["layers"] = *o.layers;
  if (o.ffn_hidden) e["ffn_hidden"] = *o.ffn_hidden;
  if (o.history) e["history"] = *o.history;
  if (o.future) e["horizon"] = *o.future;
  if (o.ablate) {
    const auto a = hfttc::cli::parse_ablation(o.ablate);
    e["gnn"] = a.gnn;
    e["deterministic"] = a.deterministic;
  }
  return e;
}

Model load_model(const fs::path & path, const RunOptions & o)
{
  json overrides = json::object();
  if (o.ablate) {
    overrides["kinematic"] = hfttc::cli::parse_ablation(o.ablate).kinematic;
  }
  hfttc_model * raw = nullptr;
  check(hfttc_model_load(
    path.string().c_str(), structural_expectations(o).dump().c_str(), overrides.dump().c_str(), &raw));
  return Model(raw);
}

int cmd_train(const RunOptions & o)
{
  hfttc::cli::parse_behavior(o.behavior);
  const auto ablation = hfttc::cli::parse_ablation(o.ablate);
  const auto out = prepare_out(o);
  auto scenes = select_scenes(load_data(o), o, "train");
  const auto first = scene_json(scenes.get(), 0);

  json config = json::object();
  config["node_dim"] = o.node_dim.value_or(64);
  config["layers"] = o.layers.value_or(2);
  config["ffn_hidden"] = o.ffn_hidden.value_or(0);
  config["modes"] = o.modes.value_or(5);
  config["tau"] = o.tau.value_or(0.5);
  config["history"] = first.at("past").at(0).size();
  config["horizon"] = first.at("future").at(0).size();
  config["dt"] = first.at("dt");
  config["gnn"] = ablation.gnn;
  config["deterministic"] = ablation.deterministic;
  config["kinematic"] = ablation.kinematic;

  json loss = json::object();
  loss["lambda"] = o.lambda.value_or(1.0);
  loss["lr"] = o.lr.value_or(1e-3);
  loss["steps"] = o.steps.value_or(500);
  loss["batch_size"] = o.batch_size.value_or(16);
  loss["seed"] = o.seed.value_or(0);
  if (o.lr && *o.lr == 0.0) {
    std::cerr << "warning: --lr 0 leaves every parameter unchanged\n";
  }

  hfttc_model * raw = nullptr;
  check(hfttc_model_create(config.dump().c_str(), o.seed.value_or(0), &raw));
  Model model(raw);
  char * log = nullptr;
  check(hfttc_model_train(model.get(), scenes.get(), loss.dump().c_str(), &log));
  write_file(out / "train_log.csv", take(log));
  const auto ckpt = checkpoint_for_write(o, out);
  check(hfttc_model_save(model.get(), ckpt.string().c_str()));
  std::cout << "trained on " << hfttc_scenes_count(scenes.get()) << " scenes; checkpoint " << ckpt.string() << '\n';
  return 0;
}

int cmd_evaluate(const RunOptions & o)
{
  const auto behavior = hfttc::cli::parse_behavior(o.behavior);
  const auto out = prepare_out(o);
  const auto path = checkpoint_for_read(o, out);
  if (!path) {
    throw ApiError(HFTTC_ERR_DATA, "no checkpoint: pass --checkpoint or train into '" + out.string() + "' first");
  }
  auto model = load_model(*path, o);
  auto scenes = select_scenes(load_data(o), o, "test");
  char * metrics = nullptr;
  char * table = nullptr;
  check(hfttc_model_evaluate(model.get(), scenes.get(), behavior.c_str(), 1, &metrics, &table));
  write_file(out / "metrics.json", take(metrics) + "\n");
  const auto csv = take(table);
  write_file(out / "rmse_table.csv", csv);
  std::cout << csv;
  return 0;
}

/// Risk report, CDF CSVs and plots for every scene in the set.
void risk_artifacts(const hfttc_model * model, const hfttc_scenes * scenes, const RunOptions & o, const fs::path & out)
{
  const auto behavior = hfttc::cli::parse_behavior(o.behavior);
  json thr = json::object();
  thr["rx"] = o.rx.value_or(5.0);
  thr["ry"] = o.ry.value_or(2.0);
  thr["horizon"] = o.horizon.value_or(10.0);
  const bool traditional = o.traditional.value_or(false);

  const std::size_t n = hfttc_scenes_count(scenes);
  for (std::size_t i = 0; i < n; ++i) {
    char * text = nullptr;
    check(hfttc_scenario_risk(model, scenes, i, thr.dump().c_str(), behavior.c_str(), &text));
    const std::string report_text = take(text);
    const auto report = json::parse(report_text);
    const std::string stem = sanitize(report.at("scene").get<std::string>());
    write_file(out / (stem + "_risk.json"), report_text + "\n");

    const auto & pairs = report.at("pairs");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto & pr = pairs[k];
      const std::string name = stem + "_" + std::to_string(pr.at("pair")[0].get<std::int64_t>()) + "-" +
                               std::to_string(pr.at("pair")[1].get<std::int64_t>()) + "_" +
                               pr.at("behavior").get<std::string>();
      char * cdf_text = nullptr;
      check(hfttc_risk_cdf_csv(report_text.c_str(), k, &cdf_text));
      const std::string cdf = take(cdf_text);

      hfttc::cli::DistributionPlot plot;
      plot.title = report.at("scene").get<std::string>() + "  host " + pr.at("pair")[0].dump() + " / vehicle " +
                   pr.at("pair")[1].dump() + "  (" + pr.at("behavior").get<std::string>() + ")";
      plot.horizon = report.at("thresholds").at("horizon");
      for (const auto & a : pr.at("ttc_atoms")) {
        plot.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
      }
      plot.no_event_mass = pr.at("no_event_mass");
      if (!pr.at("traditional_ttc").is_null()) {
        plot.traditional = pr.at("traditional_ttc").get<double>();
      }
      plot.show_traditional = traditional;

      std::istringstream lines(cdf);
      std::string line;
      std::string csv;
      std::getline(lines, line);
      csv = traditional ? line + ",traditional\n" : line + "\n";
      while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        const double t = std::stod(line.substr(0, comma));
        plot.cdf.emplace_back(t, std::stod(line.substr(comma + 1)));
        csv += line;
        if (traditional) {
          csv += (plot.traditional && *plot.traditional <= t + 1e-9) ? ",1" : ",0";
        }
        csv += '\n';
      }
      write_file(out / (name + ".csv"), csv);
      write_file(out / (name + ".svg"), hfttc::cli::render_svg(plot));
    }
  }
}

/// Network predictor when a checkpoint is available, else constant velocity.
Model optional_model(const RunOptions & o, const fs::path & out)
{
  const auto path = checkpoint_for_read(o, out);
  if (!path) {
    std::cerr << "note: no checkpoint found, using the constant-velocity predictor\n";
    return Model();
  }
  return load_model(*path, o);
}

int cmd_safety(const RunOptions & o)
{
  hfttc::cli::parse_behavior(o.behavior);
  const auto out = prepare_out(o);
  auto model = optional_model(o, out);
  auto scenes = select_scenes(load_data(o), o, "all");
  risk_artifacts(model.get(), scenes.get(), o, out);
  std::cout << "risk reports for " << hfttc_scenes_count(scenes.get()) << " scenes in " << out.string() << '\n';
  return 0;
}

int cmd_scenario(const RunOptions & o)
{
  hfttc::cli::parse_behavior(o.behavior);
  if (!o.data) {
    throw UsageError("scenario needs a spec file (positional or --data)");
  }
  const std::string spec = read_file(*o.data);
  json doc;
  try {
    doc = json::parse(spec);
  } catch (const json::parse_error & e) {
    throw UsageError("scenario spec '" + *o.data + "' is not valid JSON: " + e.what());
  }
  const auto out = prepare_out(o);

  const double window = doc.is_object() && doc.contains("window") && doc["window"].is_number() ? doc["window"].get<double>()
                                                                                               : 0.0;
  const double interval = window > 0.0 ? o.snapshot_interval.value_or(1.0) : 0.0;
  hfttc_scenes * raw = nullptr;
  check(hfttc_scenes_from_scenario(spec.c_str(), interval, &raw));
  Scenes scenes(raw);

  const std::string name = sanitize(doc.value("name", fs::path(*o.data).stem().string()));
  check(hfttc_scenario_write_csv(spec.c_str(), (out / (name + ".csv")).string().c_str()));
  check(hfttc_scenes_save_cache(scenes.get(), (out / (name + ".hfsc")).string().c_str()));

  auto model = optional_model(o, out);
  risk_artifacts(model.get(), scenes.get(), o, out);
  std::cout << "scenario " << name << ": " << hfttc_scenes_count(scenes.get()) << " scene(s) analysed in "
            << out.string() << '\n';
  return 0;
}

int exit_code(hfttc_status s)
{
  switch (s) {
    case HFTTC_ERR_CONFIG: return 2;
    case HFTTC_ERR_DATA: return 3;
    case HFTTC_ERR_NUMERIC: return 4;
    default: return 1;
  }
}

void add_common(CLI::App * sub, RunOptions & f, std::string & config_path)
{
  sub->add_option("--config", config_path, "JSON file with the same keys as the long flags");
  sub->add_option("--data", f.data, "CSV file, directory of CSVs, .hfsc cache, scenario .json or synthetic:N[:seed]");
  sub->add_option("--checkpoint", f.checkpoint, "Model checkpoint (relative paths live under --out)");
  sub->add_option("--out", f.out, "Output directory (default: $HFTTC_OUT or ./out)");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--tau", f.tau, "Hyperedge affinity threshold");
  sub->add_option("--modes", f.modes, "Number of predicted modes");
  sub->add_option("--node-dim", f.node_dim, "Node embedding width");
  sub->add_option("--layers", f.layers, "Transformer layers");
  sub->add_option("--ffn-hidden", f.ffn_hidden, "Feed-forward width (0: four times node width)");
  sub->add_option("--history", f.history, "History length in frames");
  sub->add_option("--future", f.future, "Prediction length in frames");
  sub->add_option("--behavior", f.behavior, "last_step, average, self_prediction or all");
  sub->add_option("--ablate", f.ablate, "gnn, deterministic or kinematic (repeatable)");
  sub->add_option("--split", f.split, "train, test or all");
  sub->add_option("--train-fraction", f.train_fraction, "Share of recordings in the training split");
  sub->add_option("--split-seed", f.split_seed, "Seed of the train/test shuffle");
  sub->add_option("--max-scenes", f.max_scenes, "Use at most this many scenes");
  sub->add_option("--scene", f.scene, "Only the scene with this id");
  sub->add_option("--stride", f.stride, "Window stride in frames");
  sub->add_option("--radius", f.radius, "Neighbor radius in meters");
  sub->add_option("--max-ambient", f.max_ambient, "Neighbors kept per scene");
}

void add_training(CLI::App * sub, RunOptions & f)
{
  sub->add_option("--lambda", f.lambda, "Weight of the mean-over-modes loss term");
  sub->add_option("--lr", f.lr, "Adam learning rate");
  sub->add_option("--steps", f.steps, "Optimizer steps");
  sub->add_option("--batch-size", f.batch_size, "Scenes per step");
}

void add_safety(CLI::App * sub, RunOptions & f)
{
  sub->add_option("--rx", f.rx, "Longitudinal safety distance in meters");
  sub->add_option("--ry", f.ry, "Lateral safety distance in meters");
  sub->add_option("--horizon", f.horizon, "TTC search horizon in seconds");
  sub->add_flag("--traditional", f.traditional, "Overlay the single-trajectory TTC");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Hypergraph transformer trajectory prediction and probabilistic time-to-collision"};
  app.set_version_flag("--version", hfttc_version());
  app.require_subcommand(1);

  RunOptions flags;
  std::string config_path;
  auto * train = app.add_subcommand("train", "Train a model and write a checkpoint");
  auto * evaluate = app.add_subcommand("evaluate", "Prediction metrics of a checkpoint");
  auto * safety = app.add_subcommand("safety", "Time-to-collision distributions for scenes");
  auto * scenario = app.add_subcommand("scenario", "Simulate a scripted scenario and analyse its risk");
  for (auto * sub : {train, evaluate, safety, scenario}) {
    add_common(sub, flags, config_path);
  }
  add_training(train, flags);
  add_safety(safety, flags);
  add_safety(scenario, flags);
  std::string spec_path;
  scenario->add_option("spec", spec_path, "Scenario spec JSON");
  scenario->add_option("--snapshot-interval", flags.snapshot_interval, "Seconds between snapshots of a windowed spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (!spec_path.empty()) {
      if (flags.data) {
        throw UsageError("give the scenario spec either positionally or with --data, not both");
      }
      flags.data = spec_path;
    }
    RunOptions o = config_path.empty() ? flags : hfttc::cli::merge(flags, hfttc::cli::options_from_file(config_path));
    if (o.subcommand && *o.subcommand != name) {
      throw UsageError("config file is for '" + *o.subcommand + "', not '" + name + "'");
    }
    if (name == "train") return cmd_train(o);
    if (name == "evaluate") return cmd_evaluate(o);
    if (name == "safety") return cmd_safety(o);
    return cmd_scenario(o);
  } catch (const UsageError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ApiError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.status);
  } catch (const IoError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
