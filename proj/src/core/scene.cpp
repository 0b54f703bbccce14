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

#include "hfttc/core/scene.hpp"

#include "hfttc/core/errors.hpp"

#include <cmath>

namespace hfttc
{

Point2 to_scene_frame(Point2 raw, Point2 origin, double rotation)
{
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double dx = raw.x - origin.x, dy = raw.y - origin.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Point2 from_scene_frame(Point2 local, Point2 origin, double rotation)
{
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {c * local.x - s * local.y + origin.x, s * local.x + c * local.y + origin.y};
}

Scene permute_ambient(const Scene & scene, const std::vector<std::size_t> & perm)
{
  const std::size_t a = scene.ambient_count();
  if (perm.size() != a) {
    throw ContractError("permutation size does not match the ambient count");
  }
  Scene out = scene;
  for (std::size_t i = 0; i < a; ++i) {
    const std::size_t src = perm[i];
    if (src >= a) {
      throw ContractError("permutation index out of range");
    }
    out.ambient_ids[i] = scene.ambient_ids[src];
    out.past[i + 1] = scene.past[src + 1];
    if (!scene.future.empty()) {
      out.future[i + 1] = scene.future[src + 1];
    }
  }
  return out;
}

void check_scene(const Scene & scene)
{
  if (scene.past.empty()) {
    throw ContractError("scene '" + scene.id + "' has no host row");
  }
  if (scene.ambient_ids.size() + 1 != scene.past.size()) {
    throw ContractError("scene '" + scene.id + "': ambient ids do not match history rows");
  }
  if (!scene.future.empty() && scene.future.size() != scene.past.size()) {
    throw ContractError("scene '" + scene.id + "': future rows do not match history rows");
  }
  const std::size_t th = scene.history_length();
  for (const auto & row : scene.past) {
    if (row.size() != th) {
      throw ContractError("scene '" + scene.id + "': ragged history");
    }
  }
  const std::size_t tp = scene.future_length();
  for (const auto & row : scene.future) {
    if (row.size() != tp) {
      throw ContractError("scene '" + scene.id + "': ragged future");
    }
  }
  if (!(scene.dt > 0.0)) {
    throw ContractError("scene '" + scene.id + "': time step must be positive");
  }
}

}  // namespace hfttc
