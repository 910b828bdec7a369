#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spinring::plot {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotSpec {
  std::string x_label = "error";
  std::string y_label = "log-sensitivity norm";
  std::string title;
  bool log_x = true;
  bool log_y = true;
  int width = 800;
  int height = 600;
};

struct ScatterOutput {
  std::string svg;
  std::string csv;  // series,x,y for every plotted point
  std::size_t plotted = 0;
  std::size_t dropped = 0;  // non-finite, or non-positive on a log axis
};

/// Scatter plot with one <circle class="marker"> per plotted point.
ScatterOutput render_scatter(const std::vector<Series>& series, const PlotSpec& spec);

}  // namespace spinring::plot
