// Command line front end: simulate | sweep | plot | verify | schema.
// Exit codes: 0 success, 2 config error, 3 grasp failure, 4 invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inhand/errors.hpp"
#include "inhand/scenario.hpp"
#include "inhand/simulate.hpp"
#include "inhand/svg_plot.hpp"
#include "inhand/sweep.hpp"
#include "inhand/verify.hpp"

namespace {

using namespace inhand;

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool plots) {
  const harness::ScenarioConfig cfg = harness::load_scenario_file(config_path);
  const harness::RunResult result = harness::run_scenario(cfg);
  harness::write_outputs(result, out_dir, plots);

  std::cout << "scenario: " << cfg.name << "\n";
  std::cout << "rows: " << result.log.rows.size() << "\n";
  if (result.report.terminal_event) {
    std::cout << "event: " << result.report.terminal_event->kind << " at t="
              << result.report.terminal_event->t << " (" << result.report.terminal_event->detail
              << ")\n";
  }
  if (!result.report.invariants_ok) {
    for (const auto& v : result.report.violations) std::cout << "violation: " << v << "\n";
  }
  std::cout << "wall: " << result.report.wall_seconds << " s\n";
  std::cout << "outputs: " << out_dir << "\n";
  return result.exit_code;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::vector<double>& values, const std::string& out_dir, int jobs) {
  const harness::ScenarioConfig base = harness::load_scenario_file(config_path);
  const harness::SweepAxis axis = harness::sweep_axis_from_name(axis_name);
  const harness::SweepSummary summary = harness::run_sweep(base, axis, values, jobs);

  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/summary.csv";
  std::ofstream out(path, std::ios::binary);
  out << summary.to_csv();
  std::cout << summary.to_csv();
  std::cout << "summary: " << path << "\n";

  for (const auto& row : summary.rows) {
    if (row.exit_code != 0 && row.exit_code != 3) return row.exit_code;
  }
  return 0;
}

int cmd_plot(const std::string& log_path, const std::string& out_dir) {
  const harness::TimeSeriesLog log = harness::TimeSeriesLog::read_csv_file(log_path);
  const auto files = harness::emit_plots(log, out_dir);
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  const harness::SuiteResult res = harness::run_suite(suite, seed);
  for (const auto& line : res.lines) std::cout << line << "\n";
  if (!res.counterexamples.empty()) {
    std::cout << "counterexamples:\n";
    for (const auto& ce : res.counterexamples) std::cout << "  " << ce << "\n";
  }
  std::cout << (res.pass ? "PASS" : "FAIL") << "  suite " << res.suite << "\n";
  return res.pass ? 0 : 4;
}

int cmd_schema() {
  nlohmann::json j;
  j["scenario"] = harness::scenario_schema();
  j["hand"] = kinematics::hand_schema();
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid-body grasp simulation and robust in-hand manipulation control"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", log_path, axis, suite;
  std::vector<double> values;
  bool plots = false;
  int jobs = 1;
  std::uint64_t seed = 1;

  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  sim->add_option("--config", config_path, "scenario JSON")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_flag("--plots", plots, "emit SVG plots");

  auto* sw = app.add_subcommand("sweep", "Run a scenario over a parameter axis");
  sw->add_option("--config", config_path, "base scenario JSON")->required();
  sw->add_option("--axis", axis, "object_mass | epsilon")->required();
  sw->add_option("--values", values, "axis values")->required()->delimiter(',');
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--jobs", jobs, "parallel workers");

  auto* pl = app.add_subcommand("plot", "Render SVG plots from a log");
  pl->add_option("--log", log_path, "log CSV")->required();
  pl->add_option("--out", out_dir, "output directory");

  auto* vf = app.add_subcommand("verify", "Run a property suite");
  vf->add_option("--suite", suite, "kinematics | conservation | lemmas | dual_form | qp | all")
      ->required();
  vf->add_option("--seed", seed, "randomized-check seed");

  app.add_subcommand("schema", "Print the scenario and hand config schemas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(config_path, out_dir, plots);
    if (app.got_subcommand("sweep")) return cmd_sweep(config_path, axis, values, out_dir, jobs);
    if (app.got_subcommand("plot")) return cmd_plot(log_path, out_dir);
    if (app.got_subcommand("verify")) return cmd_verify(suite, seed);
    if (app.got_subcommand("schema")) return cmd_schema();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GraspError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
