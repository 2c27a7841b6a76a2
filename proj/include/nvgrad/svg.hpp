#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace nvgrad::svg {

struct Series {
  Eigen::VectorXd x, y;
  std::string label;
  std::string color = "#1f77b4";
  bool markers = false;  // points instead of a polyline
};

struct Axes {
  std::string title;
  std::string x_label, y_label;  // units appended by the caller
  double x_scale = 1.0, y_scale = 1.0;  // multiply data before plotting
};

/// Picks nm or um for a length span in metres; returns the factor and the unit name.
std::pair<double, std::string> length_unit(double span);

/// Line/scatter plot with axes, ticks and a legend.
std::string plot(const std::vector<Series>& series, const Axes& axes);

struct Heatmap {
  Eigen::ArrayXXd values;  // (i, j) = cell at (x0 + i dx, y0 + j dy)
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // optional, true = blank
  double x0 = 0, y0 = 0, dx = 1, dy = 1;  // cell centres, metres
  std::string title, value_label, x_label = "x", y_label = "y";
  bool length_axes = true;  // label axes in nm/um
  /// Categorical axes: one label per column/row, cells drawn on an index grid.
  std::vector<std::string> x_categories, y_categories;
};

/// Colour map with a value colorbar; diverging when the data change sign.
std::string heatmap(const Heatmap& map);

void save(const std::string& path, const std::string& document);

}  // namespace nvgrad::svg
