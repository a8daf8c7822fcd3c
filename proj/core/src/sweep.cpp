#include "inhand/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "inhand/errors.hpp"

namespace inhand::harness {

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "object_mass") return SweepAxis::ObjectMass;
  if (name == "epsilon") return SweepAxis::Epsilon;
  throw ConfigError("axis", "expected 'object_mass' or 'epsilon'");
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
  ScenarioConfig cfg = base;
  switch (axis) {
    case SweepAxis::ObjectMass:
      if (value <= 0.0) throw ConfigError("values", "object mass must be positive");
      cfg.object.mass = value;
      if (cfg.inertia_auto) {
        cfg.object.inertia_body = dynamics::ObjectModel::uniform_inertia(cfg.object.shape, value);
      }
      break;
    case SweepAxis::Epsilon: {
      if (!cfg.controller.gains.has_epsilon_form()) {
        throw ConfigError("values", "epsilon sweep needs epsilon-form gains");
      }
      const auto& g = cfg.controller.gains;
      cfg.controller.gains = control::GainConfig::from_epsilon(g.M_bar, g.K1, g.K2, value, g.k_f);
      break;
    }
  }
  return cfg;
}

namespace {

// slack-tolerant monotonicity over per-component series
bool non_increasing(const std::vector<Vec6>& seq, double abs_slack) {
  for (size_t k = 1; k < seq.size(); ++k) {
    for (int c = 0; c < 6; ++c) {
      const double prev = seq[k - 1][c];
      const double cur = seq[k][c];
      if (cur > prev + abs_slack + 0.01 * std::abs(prev)) return false;
    }
  }
  return true;
}

}  // namespace

SweepSummary run_sweep(const ScenarioConfig& base, SweepAxis axis,
                       const std::vector<double>& values, int jobs) {
  SweepSummary summary;
  summary.axis = axis;
  summary.rows.resize(values.size());
  if (values.empty()) {
    summary.all_converged = true;
    return summary;
  }

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  std::vector<size_t> next_index(1, 0);
  std::mutex mu;
  auto work = [&]() {
    for (;;) {
      size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_index[0] >= values.size()) return;
        idx = next_index[0]++;
      }
      SweepRow row;
      row.value = values[idx];
      try {
        const RunResult r = run_scenario(apply_axis(base, axis, values[idx]));
        row.exit_code = r.exit_code;
        row.tainted = r.report.tainted;
        row.metrics = r.report.metrics;
        if (r.report.terminal_event) row.terminal_time = r.report.terminal_event->t;
      } catch (const Error& e) {
        row.exit_code = 2;
      }
      summary.rows[idx] = row;
    }
  };
  if (workers == 1) {
    work();
  } else {
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // verdicts on sorted copies
  std::vector<SweepRow> sorted = summary.rows;
  if (axis == SweepAxis::Epsilon) {
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.value > b.value; });
    std::vector<Vec6> settle, overshoot;
    for (const auto& r : sorted) {
      settle.push_back(r.metrics.settling_time);
      Vec6 ov = r.metrics.overshoot;
      for (int c = 0; c < 6; ++c) ov[c] = std::max(ov[c], 0.0) < 1e-6 ? 0.0 : ov[c];
      overshoot.push_back(ov);
    }
    summary.settling_non_increasing = non_increasing(settle, 2e-3);
    summary.overshoot_non_increasing = non_increasing(overshoot, 1e-6);
  } else {
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
    bool peak_ok = true, sse_ok = true;
    for (size_t k = 1; k < sorted.size(); ++k) {
      const double prev_peak = sorted[k - 1].metrics.overshoot.cwiseAbs().maxCoeff();
      const double cur_peak = sorted[k].metrics.overshoot.cwiseAbs().maxCoeff();
      if (cur_peak + 1e-9 < prev_peak * 0.99) peak_ok = false;
      const double prev_sse = sorted[k - 1].metrics.steady_state_error.norm();
      const double cur_sse = sorted[k].metrics.steady_state_error.norm();
      if (cur_sse <= prev_sse) sse_ok = false;
    }
    summary.peak_error_non_decreasing = peak_ok;
    summary.sse_increasing = sse_ok;
  }
  summary.all_converged = std::all_of(summary.rows.begin(), summary.rows.end(),
                                      [](const SweepRow& r) { return r.exit_code == 0; });
  return summary;
}

std::string SweepSummary::to_csv() const {
  std::ostringstream os;
  os << "value,exit_code,terminal_time,settle_0,settle_1,settle_2,settle_3,settle_4,settle_5,"
        "overshoot_0,overshoot_1,overshoot_2,overshoot_3,overshoot_4,overshoot_5,"
        "sse_0,sse_1,sse_2,sse_3,sse_4,sse_5,exp_rate,exp_fit_r2,tainted\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    os << buf;
  };
  for (const auto& r : rows) {
    put(r.value);
    os << "," << r.exit_code << ",";
    put(r.terminal_time);
    for (int c = 0; c < 6; ++c) {
      os << ",";
      put(r.metrics.settling_time[c]);
    }
    for (int c = 0; c < 6; ++c) {
      os << ",";
      put(r.metrics.overshoot[c]);
    }
    for (int c = 0; c < 6; ++c) {
      os << ",";
      put(r.metrics.steady_state_error[c]);
    }
    os << ",";
    put(r.metrics.exp_rate);
    os << ",";
    put(r.metrics.exp_fit_r2);
    os << "," << (r.tainted ? 1 : 0) << "\n";
  }
  os << "# verdicts";
  if (axis == SweepAxis::Epsilon) {
    os << ",settling_non_increasing=" << (settling_non_increasing ? 1 : 0)
       << ",overshoot_non_increasing=" << (overshoot_non_increasing ? 1 : 0);
  } else {
    os << ",peak_error_non_decreasing=" << (peak_error_non_decreasing ? 1 : 0)
       << ",sse_increasing=" << (sse_increasing ? 1 : 0);
  }
  os << ",all_converged=" << (all_converged ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace inhand::harness
