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

#ifndef HFTTC__CORE__SCENE_HPP_
#define HFTTC__CORE__SCENE_HPP_

#include "hfttc/core/dynamics.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hfttc
{

using dynamics::Point2;

/// One prediction window in host-normalized coordinates. Row 0 is the host.
struct Scene
{
  std::string id;
  /// Source recording; split grouping key.
  std::string recording;
  std::int64_t host_id = 0;
  std::vector<std::int64_t> ambient_ids;
  double dt = 0.1;
  /// past[v][k], k = 0 .. T_h - 1, for every vehicle.
  std::vector<std::vector<Point2>> past;
  /// future[v][k], k = 0 .. T_p - 1 (frames after the last history frame).
  std::vector<std::vector<Point2>> future;
  /// Raw coordinates of the normalization origin and the heading removed.
  Point2 origin{};
  double rotation = 0.0;
  /// Raw frame index of the last history frame.
  std::int64_t anchor_frame = 0;

  std::size_t vehicle_count() const { return past.size(); }
  std::size_t ambient_count() const { return past.empty() ? 0 : past.size() - 1; }
  std::size_t history_length() const { return past.empty() ? 0 : past.front().size(); }
  std::size_t future_length() const { return future.empty() ? 0 : future.front().size(); }
  std::int64_t vehicle_id(std::size_t row) const { return row == 0 ? host_id : ambient_ids.at(row - 1); }
};

/// Raw -> scene frame: translate by -origin, rotate by -rotation.
Point2 to_scene_frame(Point2 raw, Point2 origin, double rotation);
/// Scene frame -> raw.
Point2 from_scene_frame(Point2 local, Point2 origin, double rotation);

/// Reorders ambient rows; perm[i] is the old ambient index placed at i.
Scene permute_ambient(const Scene & scene, const std::vector<std::size_t> & perm);

/// Throws ContractError when rows are ragged or the host row is missing.
void check_scene(const Scene & scene);

}  // namespace hfttc

#endif  // HFTTC__CORE__SCENE_HPP_
