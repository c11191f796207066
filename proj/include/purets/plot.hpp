#pragma once

#include <string>
#include <vector>

namespace purets {

struct PlotSeries {
  std::string label;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_start = 0.0;  // x of sample 0; sample k sits at x_start + k*x_step
  double x_step = 1.0;
  bool log_y = false;  // falls back to linear if any value is <= 0
  int width = 960;
  int height = 540;
};

/// Self-contained SVG line chart. Output is a pure function of the inputs:
/// same data, same bytes. Series may have different lengths; all values must
/// be finite.
std::string render_line_chart(const std::vector<PlotSeries>& series,
                              const PlotOptions& opts);

}  // namespace purets
