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

#include "hfttc/core/dataset.hpp"

#include "hfttc/core/errors.hpp"
#include "hfttc/core/parameters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace hfttc::data
{

namespace
{

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void row_error(std::size_t row, const std::string & what)
{
  throw DataError("row " + std::to_string(row) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, std::size_t row, const char * column)
{
  field = trim(field);
  T v{};
  const auto * end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    row_error(row, std::string("cannot parse ") + column + " '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      row_error(row, std::string("non-finite ") + column);
    }
  }
  return v;
}

void shuffle_in_place(std::vector<std::size_t> & idx, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(numerics::uniform01(rng) * static_cast<double>(i));
    j = std::min(j, i - 1);
    std::swap(idx[i - 1], idx[j]);
  }
}

// Binary cache helpers, little-endian on every supported target.
class Writer
{
public:
  explicit Writer(std::ostream & out) : out_(out) {}
  template <typename T>
  void pod(T v)
  {
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void str(const std::string & s)
  {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void points(const std::vector<std::vector<Point2>> & rows)
  {
    pod(static_cast<std::uint32_t>(rows.size()));
    for (const auto & r : rows) {
      pod(static_cast<std::uint32_t>(r.size()));
      for (const auto & p : r) {
        pod(p.x);
        pod(p.y);
      }
    }
  }

private:
  std::ostream & out_;
};

class Reader
{
public:
  Reader(std::istream & in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T pod()
  {
    T v{};
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in_) {
      throw DataError("scene cache '" + path_ + "' is truncated");
    }
    return v;
  }
  std::string str()
  {
    const auto n = count();
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) {
      throw DataError("scene cache '" + path_ + "' is truncated");
    }
    return s;
  }
  std::vector<std::vector<Point2>> points()
  {
    std::vector<std::vector<Point2>> rows(count());
    for (auto & r : rows) {
      r.resize(count());
      for (auto & p : r) {
        p.x = pod<double>();
        p.y = pod<double>();
      }
    }
    return rows;
  }

private:
  std::size_t count()
  {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 28)) {
      throw DataError("scene cache '" + path_ + "' is corrupt");
    }
    return n;
  }
  std::istream & in_;
  std::string path_;
};

constexpr char kMagic[4] = {'H', 'F', 'S', 'C'};
constexpr const char * kSchema =
  "scene{id:str,recording:str,host_id:i64,ambient_ids:[i64],dt:f64,past:[[f64x2]],future:[[f64x2]],"
  "origin:f64x2,rotation:f64,anchor_frame:i64}";

}  // namespace

std::map<std::int64_t, std::map<std::int64_t, Point2>> Recording::tracks() const
{
  std::map<std::int64_t, std::map<std::int64_t, Point2>> out;
  for (const auto & r : records) {
    out[r.vehicle_id][r.frame] = {r.x, r.y};
  }
  return out;
}

Recording parse_trajectories(std::istream & in, const std::string & name)
{
  Recording rec;
  rec.name = name;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("'" + name + "' is empty");
  }
  auto header = split_fields(line);
  for (auto & h : header) {
    h = trim(h);
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) {
    header[0].remove_prefix(3);
  }
  const std::vector<std::string_view> base{"vehicle_id", "frame", "t", "x", "y"};
  const bool with_lane = header.size() == 6 && header[5] == "lane";
  if (!(header.size() == 5 || with_lane) || !std::equal(base.begin(), base.end(), header.begin())) {
    throw DataError("row 1: header must be vehicle_id,frame,t,x,y[,lane], got '" + std::string(trim(line)) + "'");
  }

  std::map<std::int64_t, std::pair<std::int64_t, double>> last;  // vehicle -> (frame, t)
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::optional<double> dt;
  std::optional<std::pair<std::int64_t, double>> reference;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      row_error(row, "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(f.size()));
    }
    TrajectoryRecord r;
    r.vehicle_id = parse_number<std::int64_t>(f[0], row, "vehicle_id");
    r.frame = parse_number<std::int64_t>(f[1], row, "frame");
    r.t = parse_number<double>(f[2], row, "t");
    r.x = parse_number<double>(f[3], row, "x");
    r.y = parse_number<double>(f[4], row, "y");
    if (with_lane && !trim(f[5]).empty()) {
      r.lane = parse_number<std::int64_t>(f[5], row, "lane");
    }
    if (!seen.insert({r.vehicle_id, r.frame}).second) {
      row_error(row, "duplicated (vehicle " + std::to_string(r.vehicle_id) + ", frame " + std::to_string(r.frame) + ")");
    }
    if (auto it = last.find(r.vehicle_id); it != last.end()) {
      const auto [pf, pt] = it->second;
      if (r.frame <= pf) {
        row_error(row, "frames of vehicle " + std::to_string(r.vehicle_id) + " are not increasing");
      }
      const double step = (r.t - pt) / static_cast<double>(r.frame - pf);
      if (!(step > 0.0)) {
        row_error(row, "timestamps of vehicle " + std::to_string(r.vehicle_id) + " are not increasing");
      }
      if (!dt) {
        dt = step;
      } else if (std::abs(step - *dt) > 1e-6) {
        row_error(row, "mixed time step");
      }
    }
    last[r.vehicle_id] = {r.frame, r.t};
    rec.records.push_back(r);
  }
  if (!dt) {
    throw DataError("'" + name + "': cannot infer the time step (no vehicle has two frames)");
  }
  rec.dt = *dt;
  // Every record must sit on the common clock.
  reference = std::make_pair(rec.records.front().frame, rec.records.front().t);
  for (std::size_t i = 0; i < rec.records.size(); ++i) {
    const auto & r = rec.records[i];
    const double expect = reference->second + static_cast<double>(r.frame - reference->first) * rec.dt;
    if (std::abs(r.t - expect) > 1e-6 * std::max(1.0, std::abs(expect))) {
      throw DataError("'" + name + "': record " + std::to_string(i + 2) + " (vehicle " + std::to_string(r.vehicle_id) +
        ", frame " + std::to_string(r.frame) + ") is off the common clock: mixed time step");
    }
  }
  return rec;
}

Recording load_trajectories(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path + "'");
  }
  try {
    return parse_trajectories(in, std::filesystem::path(path).stem().string());
  } catch (const DataError & e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<Recording> load_recordings(const std::string & path)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<std::string> files;
    for (const auto & e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") {
        files.push_back(e.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw DataError("no .csv recordings in '" + path + "'");
    }
    std::vector<Recording> out;
    for (const auto & f : files) {
      out.push_back(load_trajectories(f));
    }
    return out;
  }
  return {load_trajectories(path)};
}

void write_trajectories_csv(const Recording & recording, std::ostream & out)
{
  const bool lanes = std::any_of(recording.records.begin(), recording.records.end(), [](const auto & r) { return r.lane.has_value(); });
  out << "vehicle_id,frame,t,x,y" << (lanes ? ",lane" : "") << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto & r : recording.records) {
    out << r.vehicle_id << ',' << r.frame << ',' << num(r.t) << ',' << num(r.x) << ',' << num(r.y);
    if (lanes) {
      out << ',';
      if (r.lane) {
        out << *r.lane;
      }
    }
    out << '\n';
  }
}

void WindowConfig::validate() const
{
  if (history < 3) {
    throw ConfigError("history window needs at least 3 frames");
  }
  if (horizon < 1 || stride < 1) {
    throw ConfigError("horizon and stride must be positive");
  }
  if (!(radius > 0.0)) {
    throw ConfigError("neighbor radius must be positive");
  }
}

double history_heading(std::span<const Point2> raw_history)
{
  for (std::size_t k = raw_history.size(); k > 1; --k) {
    const Point2 a = raw_history[k - 2], b = raw_history[k - 1];
    const double dx = b.x - a.x, dy = b.y - a.y;
    if (dx != 0.0 || dy != 0.0) {
      return std::atan2(dy, dx);
    }
  }
  return 0.0;
}

std::optional<Scene> scene_at(const Recording & recording,
  const std::map<std::int64_t, std::map<std::int64_t, Point2>> & tracks, std::int64_t host,
  std::int64_t anchor_frame, const WindowConfig & config, BuildStats * stats)
{
  const auto th = static_cast<std::int64_t>(config.history);
  const auto tp = static_cast<std::int64_t>(config.horizon);
  const std::int64_t first = anchor_frame - th + 1, last = anchor_frame + tp;
  auto window = [&](const std::map<std::int64_t, Point2> & track) -> std::optional<std::vector<Point2>> {
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(th + tp));
    auto it = track.find(first);
    for (std::int64_t f = first; f <= last; ++f, ++it) {
      if (it == track.end() || it->first != f) {
        return std::nullopt;
      }
      out.push_back(it->second);
    }
    return out;
  };
  const auto host_it = tracks.find(host);
  if (host_it == tracks.end()) {
    return std::nullopt;
  }
  const auto host_window = window(host_it->second);
  if (!host_window) {
    return std::nullopt;
  }
  const Point2 origin = (*host_window)[config.history - 1];

  struct Candidate
  {
    double distance;
    std::int64_t id;
    std::vector<Point2> positions;
  };
  std::vector<Candidate> candidates;
  for (const auto & [id, track] : tracks) {
    if (id == host) {
      continue;
    }
    const auto at = track.find(anchor_frame);
    if (at == track.end()) {
      continue;
    }
    const double d = std::hypot(at->second.x - origin.x, at->second.y - origin.y);
    if (d > config.radius) {
      continue;
    }
    auto w = window(track);
    if (!w) {
      if (stats) {
        ++stats->dropped_neighbors;
      }
      continue;
    }
    candidates.push_back({d, id, std::move(*w)});
  }
  std::sort(candidates.begin(), candidates.end(),
    [](const Candidate & a, const Candidate & b) { return a.distance != b.distance ? a.distance < b.distance : a.id < b.id; });
  if (candidates.size() > config.max_ambient) {
    candidates.resize(config.max_ambient);
  }

  Scene s;
  s.recording = recording.name;
  s.id = recording.name + ":" + std::to_string(host) + ":" + std::to_string(anchor_frame);
  s.host_id = host;
  s.dt = recording.dt;
  s.origin = origin;
  s.rotation = history_heading(std::span(*host_window).first(config.history));
  s.anchor_frame = anchor_frame;
  auto push = [&](const std::vector<Point2> & raw) {
    std::vector<Point2> past, future;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const Point2 p = to_scene_frame(raw[k], s.origin, s.rotation);
      (k < config.history ? past : future).push_back(p);
    }
    s.past.push_back(std::move(past));
    s.future.push_back(std::move(future));
  };
  push(*host_window);
  s.past[0].back() = {0.0, 0.0};
  for (const auto & c : candidates) {
    s.ambient_ids.push_back(c.id);
    push(c.positions);
  }
  return s;
}

std::vector<Scene> build_scenes(const Recording & recording, const WindowConfig & config, BuildStats * stats)
{
  config.validate();
  const auto tracks = recording.tracks();
  std::vector<Scene> out;
  const auto span = static_cast<std::int64_t>(config.history + config.horizon);
  for (const auto & [host, track] : tracks) {
    if (track.empty()) {
      continue;
    }
    const std::int64_t lo = track.begin()->first, hi = track.rbegin()->first;
    for (std::int64_t start = lo; start + span - 1 <= hi; start += static_cast<std::int64_t>(config.stride)) {
      if (stats) {
        ++stats->windows;
      }
      auto s = scene_at(recording, tracks, host, start + static_cast<std::int64_t>(config.history) - 1, config, stats);
      if (!s) {
        if (stats) {
          ++stats->skipped;
        }
        continue;
      }
      out.push_back(std::move(*s));
    }
  }
  if (stats) {
    stats->scenes += out.size();
  }
  return out;
}

std::vector<Scene> build_scenes(std::span<const Recording> recordings, const WindowConfig & config, BuildStats * stats)
{
  std::vector<const Recording *> order;
  for (const auto & r : recordings) {
    order.push_back(&r);
  }
  std::stable_sort(order.begin(), order.end(), [](const Recording * a, const Recording * b) { return a->name < b->name; });
  std::vector<Scene> out;
  for (const auto * r : order) {
    auto s = build_scenes(*r, config, stats);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

void SplitSpec::validate() const
{
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
}

Split split(std::span<const Scene> scenes, const SplitSpec & spec)
{
  spec.validate();
  if (scenes.empty()) {
    throw ContractError("cannot split an empty scene set");
  }
  auto cut = [&](std::size_t n) {
    auto k = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, n > 1 ? 1 : 0, n > 1 ? n - 1 : n);
  };
  Split out;
  std::vector<std::string> recordings;
  for (const auto & s : scenes) {
    recordings.push_back(s.recording);
  }
  std::sort(recordings.begin(), recordings.end());
  recordings.erase(std::unique(recordings.begin(), recordings.end()), recordings.end());

  if (spec.group_by_recording && recordings.size() >= 2) {
    std::vector<std::size_t> idx(recordings.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_in_place(idx, spec.seed);
    const std::size_t k = cut(recordings.size());
    std::set<std::string> train_set;
    for (std::size_t i = 0; i < k; ++i) {
      train_set.insert(recordings[idx[i]]);
    }
    for (const auto & s : scenes) {
      (train_set.count(s.recording) ? out.train : out.test).push_back(s);
    }
    return out;
  }
  if (spec.group_by_recording) {
    out.warning = "fewer than two recordings; splitting by scene";
  }
  std::vector<std::size_t> idx(scenes.size());
  std::iota(idx.begin(), idx.end(), 0);
  shuffle_in_place(idx, spec.seed);
  const std::size_t k = cut(scenes.size());
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  for (auto i : train) {
    out.train.push_back(scenes[i]);
  }
  for (auto i : test) {
    out.test.push_back(scenes[i]);
  }
  return out;
}

std::uint64_t scene_schema_hash()
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char * p = kSchema; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_scene_cache(const std::string & path, std::span<const Scene> scenes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write '" + path + "'");
  }
  out.write(kMagic, 4);
  Writer w(out);
  w.pod(kSceneCacheVersion);
  w.pod(scene_schema_hash());
  w.pod(static_cast<std::uint64_t>(scenes.size()));
  for (const auto & s : scenes) {
    w.str(s.id);
    w.str(s.recording);
    w.pod(s.host_id);
    w.pod(static_cast<std::uint32_t>(s.ambient_ids.size()));
    for (auto id : s.ambient_ids) {
      w.pod(id);
    }
    w.pod(s.dt);
    w.points(s.past);
    w.points(s.future);
    w.pod(s.origin.x);
    w.pod(s.origin.y);
    w.pod(s.rotation);
    w.pod(s.anchor_frame);
  }
  if (!out) {
    throw DataError("failed writing '" + path + "'");
  }
}

std::vector<Scene> read_scene_cache(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path + "'");
  }
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("'" + path + "' is not a scene cache");
  }
  Reader r(in, path);
  const auto version = r.pod<std::uint32_t>();
  if (version != kSceneCacheVersion) {
    throw DataError("'" + path + "' has cache version " + std::to_string(version) + ", expected " +
      std::to_string(kSceneCacheVersion));
  }
  if (r.pod<std::uint64_t>() != scene_schema_hash()) {
    throw DataError("'" + path + "' was written with a different scene schema");
  }
  const auto n = r.pod<std::uint64_t>();
  std::vector<Scene> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    Scene s;
    s.id = r.str();
    s.recording = r.str();
    s.host_id = r.pod<std::int64_t>();
    const auto a = r.pod<std::uint32_t>();
    for (std::uint32_t k = 0; k < a; ++k) {
      s.ambient_ids.push_back(r.pod<std::int64_t>());
    }
    s.dt = r.pod<double>();
    s.past = r.points();
    s.future = r.points();
    s.origin.x = r.pod<double>();
    s.origin.y = r.pod<double>();
    s.rotation = r.pod<double>();
    s.anchor_frame = r.pod<std::int64_t>();
    try {
      check_scene(s);
    } catch (const ContractError & e) {
      throw DataError("'" + path + "': " + e.what());
    }
    out.push_back(std::move(s));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("'" + path + "' has trailing bytes");
  }
  return out;
}

}  // namespace hfttc::data
