#pragma once

#include <string>
#include <vector>

#include "inhand/simulate.hpp"

namespace inhand::harness {

enum class SweepAxis { ObjectMass, Epsilon };

SweepAxis sweep_axis_from_name(const std::string& name);

struct SweepRow {
  double value = 0.0;
  int exit_code = 0;
  bool tainted = false;
  double terminal_time = -1.0;  // grasp-failure time, if any
  analysis::PerformanceMetrics metrics;
};

struct SweepSummary {
  SweepAxis axis = SweepAxis::ObjectMass;
  std::vector<SweepRow> rows;  // in the order the values were given

  // Verdicts over values sorted so the expected trend is monotone:
  // epsilon descending (smaller epsilon is faster), mass ascending.
  bool settling_non_increasing = false;  // epsilon axis
  bool overshoot_non_increasing = false; // epsilon axis
  bool peak_error_non_decreasing = false;  // mass axis
  bool sse_increasing = false;             // mass axis
  bool all_converged = false;

  std::string to_csv() const;
};

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

// One run per value; runs execute in a worker pool of `jobs` threads.
SweepSummary run_sweep(const ScenarioConfig& base, SweepAxis axis,
                       const std::vector<double>& values, int jobs = 1);

}  // namespace inhand::harness
