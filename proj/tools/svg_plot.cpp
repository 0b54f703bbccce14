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

#include "svg_plot.hpp"

#include <algorithm>
#include <cstdio>

namespace hfttc::cli
{

namespace
{

constexpr double kWidth = 640.0;
constexpr double kPanel = 220.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kGap = 60.0;

std::string fmt(const char * pattern, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string escape(const std::string & s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame
{
  double top;
  double horizon;
  double ymax;

  double x(double t) const { return kLeft + (kWidth - kLeft - kRight) * std::clamp(t / horizon, 0.0, 1.0); }
  double y(double v) const { return top + kPanel * (1.0 - std::clamp(v / ymax, 0.0, 1.0)); }
};

void axes(std::string & svg, const Frame & f, const std::string & label)
{
  svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", f.top) + "\" width=\"" +
         fmt("%.2f", kWidth - kLeft - kRight) + "\" height=\"" + fmt("%.2f", kPanel) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = f.horizon * i / 5.0;
    svg += "<text x=\"" + fmt("%.2f", f.x(t)) + "\" y=\"" + fmt("%.2f", f.top + kPanel + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + fmt("%.1f", t) + "</text>\n";
    const double v = f.ymax * i / 5.0;
    svg += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", f.y(v) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt("%.2f", v) + "</text>\n";
  }
  svg += "<text x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", f.top - 8) + "\" font-size=\"13\">" +
         escape(label) + "</text>\n";
}

}  // namespace

std::string render_svg(const DistributionPlot & plot)
{
  const double horizon = plot.horizon > 0.0 ? plot.horizon : 1.0;
  const double height = kTop + 2 * kPanel + kGap + 40;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
                    fmt("%.0f", height) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", kWidth / 2) + "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">" +
         escape(plot.title) + "</text>\n";

  double pmax = 0.0;
  for (const auto & [t, p] : plot.atoms) {
    pmax = std::max(pmax, p);
  }
  const Frame pmf{kTop, horizon, pmax > 0.0 ? pmax : 1.0};
  axes(svg, pmf, "PMF of TTC (no event within horizon: " + fmt("%.3f", plot.no_event_mass) + ")");
  for (const auto & [t, p] : plot.atoms) {
    svg += "<line x1=\"" + fmt("%.2f", pmf.x(t)) + "\" y1=\"" + fmt("%.2f", pmf.y(0)) + "\" x2=\"" +
           fmt("%.2f", pmf.x(t)) + "\" y2=\"" + fmt("%.2f", pmf.y(p)) + "\" stroke=\"#1f77b4\" stroke-width=\"3\"/>\n";
  }

  const Frame cdf{kTop + kPanel + kGap, horizon, 1.0};
  axes(svg, cdf, "CDF of TTC [s]");
  if (!plot.cdf.empty()) {
    std::string pts;
    double prev = 0.0;
    for (const auto & [t, v] : plot.cdf) {
      pts += fmt("%.2f", cdf.x(t)) + "," + fmt("%.2f", cdf.y(prev)) + " ";
      pts += fmt("%.2f", cdf.x(t)) + "," + fmt("%.2f", cdf.y(v)) + " ";
      prev = v;
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  }
  if (plot.show_traditional) {
    if (plot.traditional) {
      const double t = *plot.traditional;
      svg += "<polyline points=\"" + fmt("%.2f", cdf.x(0)) + "," + fmt("%.2f", cdf.y(0)) + " " + fmt("%.2f", cdf.x(t)) +
             "," + fmt("%.2f", cdf.y(0)) + " " + fmt("%.2f", cdf.x(t)) + "," + fmt("%.2f", cdf.y(1)) + " " +
             fmt("%.2f", cdf.x(horizon)) + "," + fmt("%.2f", cdf.y(1)) +
             "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", kWidth - kRight) + "\" y=\"" + fmt("%.2f", cdf.top - 8) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#d62728\">traditional TTC" +
           (plot.traditional ? " = " + fmt("%.2f", *plot.traditional) + " s" : std::string(": none")) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace hfttc::cli
