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

#include "hfttc/core/parameters.hpp"

#include "hfttc/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hfttc::numerics
{

namespace
{
constexpr const char * kFormat = "hfttc-parameters";
constexpr int kVersion = 1;
}  // namespace

double uniform01(std::mt19937_64 & rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void ParameterStore::set(const std::string & name, Tensor value) { params_[name] = std::move(value); }

const Tensor & ParameterStore::get(const std::string & name) const
{
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ContractError("unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor & ParameterStore::get(const std::string & name)
{
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ContractError("unknown parameter '" + name + "'");
  }
  return it->second;
}

std::size_t ParameterStore::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & [_, t] : params_) {
    n += t.size();
  }
  return n;
}

std::map<std::string, Var> ParameterStore::bind(Tape & tape) const
{
  std::map<std::string, Var> out;
  for (const auto & [name, t] : params_) {
    out.emplace(name, tape.parameter(name, t));
  }
  return out;
}

Tensor uniform_init(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng)
{
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  Tensor w = Tensor::zeros(fan_in, fan_out);
  for (auto & v : w.values()) {
    v = (2.0 * uniform01(rng) - 1.0) * bound;
  }
  return w;
}

Tensor uniform_bias(std::size_t fan_in, std::size_t size, std::mt19937_64 & rng)
{
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::vector<double> b(size);
  for (auto & v : b) {
    v = (2.0 * uniform01(rng) - 1.0) * bound;
  }
  return Tensor::vector(std::move(b));
}

std::string hex_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex_double(const std::string & s)
{
  errno = 0;
  char * end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw DataError("invalid hex float '" + s + "' in checkpoint");
  }
  return v;
}

std::string checkpoint_to_json(const ParameterStore & params)
{
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  auto & list = doc["parameters"];
  list = nlohmann::ordered_json::array();
  for (const auto & [name, t] : params.entries()) {
    nlohmann::ordered_json entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    auto & values = entry["values"];
    values = nlohmann::ordered_json::array();
    for (double v : t.values()) {
      values.push_back(hex_double(v));
    }
    list.push_back(std::move(entry));
  }
  return doc.dump(1) + "\n";
}

ParameterStore checkpoint_from_json(const std::string & text)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != kFormat) {
    throw DataError("not a parameter checkpoint (format tag missing)");
  }
  if (doc.value("version", 0) != kVersion) {
    throw DataError("unsupported checkpoint version " + doc.value("version", nlohmann::json()).dump());
  }
  ParameterStore store;
  try {
    for (const auto & entry : doc.at("parameters")) {
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      std::vector<double> values;
      for (const auto & v : entry.at("values")) {
        values.push_back(parse_hex_double(v.get<std::string>()));
      }
      store.set(entry.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)));
    }
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const DimensionError & e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
  return store;
}

void save_checkpoint(const ParameterStore & params, const std::string & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write checkpoint '" + path + "'");
  }
  out << checkpoint_to_json(params);
}

ParameterStore load_checkpoint(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open checkpoint '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace hfttc::numerics
