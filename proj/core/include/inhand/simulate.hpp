#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "inhand/analysis.hpp"
#include "inhand/logging.hpp"
#include "inhand/scenario.hpp"

namespace inhand::harness {

struct InvariantStats {
  double max_constraint_residual = 0.0;
  double max_gap = 0.0;
  double min_normal_force = 0.0;
  double max_contraction = 0.0;
  double m_min = 0.0;  // extrema of ||M_ho^{-1}||_2 over the run
  double m_max = 0.0;
  double min_lambda_Ma = 0.0;
  double max_decomposition_residual = 0.0;
  double max_skew_residual = 0.0;
};

struct VerificationReport {
  InvariantStats stats;
  bool invariants_ok = true;
  bool tainted = false;  // metrics reported despite invariant violations
  std::vector<std::string> violations;
  analysis::PerformanceMetrics metrics;
  analysis::LemmaReport lemma4;
  std::optional<LogEvent> terminal_event;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

struct RunResult {
  TimeSeriesLog log;
  VerificationReport report;
  ScenarioConfig resolved;  // gains resolved, for the config sidecar
  int exit_code = 0;        // 0 ok, 3 grasp failure, 4 invariant violation
};

RunResult run_scenario(const ScenarioConfig& cfg);

// log.csv, config.resolved.json, report.json and optional SVG plots.
void write_outputs(const RunResult& result, const std::string& out_dir, bool plots);

}  // namespace inhand::harness
