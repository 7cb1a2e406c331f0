#pragma once

#include <span>
#include <string>
#include <vector>

namespace hyst {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG color
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

// Standalone SVG document with one polyline per series, axes with min/max
// tick labels, and a legend. Output depends only on the inputs.
std::string render_svg(std::span<const PlotSeries> series, const std::string& title,
                       const std::string& x_label = "H (A/m)", const std::string& y_label = "B (T)");

}  // namespace hyst
