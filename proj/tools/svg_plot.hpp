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

#ifndef HFTTC__TOOLS__SVG_PLOT_HPP_
#define HFTTC__TOOLS__SVG_PLOT_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hfttc::cli
{

struct DistributionPlot
{
  std::string title;
  double horizon = 10.0;
  /// (ttc, probability) atoms.
  std::vector<std::pair<double, double>> atoms;
  double no_event_mass = 1.0;
  /// (t, F(t)) samples.
  std::vector<std::pair<double, double>> cdf;
  /// Drawn as a unit step when set.
  std::optional<double> traditional;
  bool show_traditional = false;
};

/// Two stacked panels, PMF on top and CDF below. Output depends only on
/// the input values.
std::string render_svg(const DistributionPlot & plot);

}  // namespace hfttc::cli

#endif  // HFTTC__TOOLS__SVG_PLOT_HPP_
