#pragma once

#include <string>
#include <vector>

namespace kbte::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  /// Emitted as an XML comment at the top of the file.
  std::string provenance;
};

/// Static line chart. Nonpositive values are skipped on a log axis.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace kbte::cli
