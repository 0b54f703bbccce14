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

#ifndef HFTTC__CORE__DATASET_HPP_
#define HFTTC__CORE__DATASET_HPP_

#include "hfttc/core/scene.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hfttc::data
{

struct TrajectoryRecord
{
  std::int64_t vehicle_id = 0;
  std::int64_t frame = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::optional<std::int64_t> lane;

  friend bool operator==(const TrajectoryRecord &, const TrajectoryRecord &) = default;
};

/// Validated records of one source recording.
struct Recording
{
  std::string name;
  double dt = 0.1;
  std::vector<TrajectoryRecord> records;

  /// vehicle -> frame -> position.
  std::map<std::int64_t, std::map<std::int64_t, Point2>> tracks() const;
};

/// Parses `vehicle_id,frame,t,x,y[,lane]`. Throws DataError naming the row
/// (1-based, header included) on malformed input, duplicated or
/// non-increasing frames, or a non-uniform time step (tolerance 1e-6 s).
Recording parse_trajectories(std::istream & in, const std::string & name);
/// Recording name is the file stem. Missing files raise DataError.
Recording load_trajectories(const std::string & path);
/// A single CSV file, or every `*.csv` of a directory in name order.
std::vector<Recording> load_recordings(const std::string & path);

void write_trajectories_csv(const Recording & recording, std::ostream & out);

struct WindowConfig
{
  std::size_t history = 30;
  std::size_t horizon = 50;
  std::size_t stride = 10;
  /// Neighbor radius [m] at the last history frame.
  double radius = 50.0;
  std::size_t max_ambient = 8;

  void validate() const;
};

struct BuildStats
{
  std::size_t windows = 0;
  std::size_t scenes = 0;
  /// Windows whose host misses a frame.
  std::size_t skipped = 0;
  /// Neighbors dropped for incomplete history or future.
  std::size_t dropped_neighbors = 0;
};

/// Scene anchored at `anchor_frame` (last history frame) for `host`, or
/// nullopt when the host misses a frame of the window.
std::optional<Scene> scene_at(const Recording & recording,
  const std::map<std::int64_t, std::map<std::int64_t, Point2>> & tracks, std::int64_t host,
  std::int64_t anchor_frame, const WindowConfig & config, BuildStats * stats = nullptr);

/// Sliding windows over every host of a recording, ordered by host id and
/// window start.
std::vector<Scene> build_scenes(const Recording & recording, const WindowConfig & config, BuildStats * stats = nullptr);
std::vector<Scene> build_scenes(std::span<const Recording> recordings, const WindowConfig & config,
  BuildStats * stats = nullptr);

/// Host heading removed by the normalization, from the last displacement of
/// the host history.
double history_heading(std::span<const Point2> raw_history);

struct SplitSpec
{
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool group_by_recording = true;

  void validate() const;
};

struct Split
{
  std::vector<Scene> train;
  std::vector<Scene> test;
  /// Set when grouping was requested but fewer than two recordings exist.
  std::optional<std::string> warning;
};

Split split(std::span<const Scene> scenes, const SplitSpec & spec);

inline constexpr std::uint32_t kSceneCacheVersion = 1;
/// FNV-1a hash of the cached field layout.
std::uint64_t scene_schema_hash();

void write_scene_cache(const std::string & path, std::span<const Scene> scenes);
/// DataError on a foreign file, version or schema mismatch, or truncation.
std::vector<Scene> read_scene_cache(const std::string & path);

}  // namespace hfttc::data

#endif  // HFTTC__CORE__DATASET_HPP_
