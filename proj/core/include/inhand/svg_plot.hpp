#pragma once

#include <string>
#include <vector>

#include "inhand/logging.hpp"

namespace inhand::harness {

struct Series {
  std::string label;
  std::vector<double> y;
};

// Deterministic standalone SVG line chart; byte output depends only on the
// inputs.
std::string render_line_chart(const std::string& title, const std::string& y_label,
                              const std::vector<double>& t, const std::vector<Series>& series);

// position_error.svg, orientation_error.svg and torque.svg under out_dir.
// Throws EmptyLog when the log has no rows.
std::vector<std::string> emit_plots(const TimeSeriesLog& log, const std::string& out_dir);

}  // namespace inhand::harness
