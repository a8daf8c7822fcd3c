#include "inhand/logging.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "inhand/errors.hpp"

namespace inhand::harness {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> TimeSeriesLog::column_names() const {
  std::vector<std::string> cols;
  cols.push_back("t");
  auto push6 = [&](const std::string& base) {
    for (int i = 0; i < 6; ++i) cols.push_back(base + "_" + std::to_string(i));
  };
  for (int i = 0; i < 3; ++i) cols.push_back("po_" + std::to_string(i));
  push6("x");
  push6("e");
  push6("edot");
  push6("um");
  for (int i = 0; i < m; ++i) cols.push_back("u_" + std::to_string(i));
  for (int i = 0; i < 3 * n; ++i) cols.push_back("uf_" + std::to_string(i));
  for (int i = 0; i < n; ++i) cols.push_back("gap_" + std::to_string(i));
  for (int i = 0; i < n; ++i) cols.push_back("fn_" + std::to_string(i));
  cols.push_back("constraint_residual");
  cols.push_back("energy");
  cols.push_back("has_diag");
  push6("psi");
  push6("eta");
  cols.push_back("contraction");
  cols.push_back("m_inv_norm");
  cols.push_back("lambda_min_Ma");
  cols.push_back("decomposition_residual");
  cols.push_back("skew_residual");
  return cols;
}

void TimeSeriesLog::write_csv(std::ostream& os) const {
  os << "# inhand log schema " << schema << " m=" << m << " n=" << n << "\n";
  const auto cols = column_names();
  for (size_t i = 0; i < cols.size(); ++i) {
    os << cols[i] << (i + 1 < cols.size() ? "," : "\n");
  }
  for (const auto& r : rows) {
    std::ostringstream line;
    line << fmt(r.t);
    auto put6 = [&](const Vec6& v) {
      for (int i = 0; i < 6; ++i) line << "," << fmt(v[i]);
    };
    auto putv = [&](const VectorXd& v, int expect) {
      for (int i = 0; i < expect; ++i) line << "," << fmt(i < v.size() ? v[i] : 0.0);
    };
    for (int i = 0; i < 3; ++i) line << "," << fmt(r.p_o[i]);
    put6(r.x);
    put6(r.e);
    put6(r.e_dot);
    put6(r.u_m);
    putv(r.u, m);
    putv(r.u_f, 3 * n);
    putv(r.gap, n);
    putv(r.normal_force, n);
    line << "," << fmt(r.constraint_residual) << "," << fmt(r.energy);
    line << "," << (r.has_diagnostics ? 1 : 0);
    put6(r.psi);
    put6(r.eta);
    line << "," << fmt(r.contraction) << "," << fmt(r.m_inv_norm) << ","
         << fmt(r.lambda_min_Ma) << "," << fmt(r.decomposition_residual) << ","
         << fmt(r.skew_residual);
    os << line.str() << "\n";
  }
  for (const auto& ev : events) {
    os << "# event," << ev.kind << "," << fmt(ev.t) << "," << ev.finger << "," << ev.detail
       << "\n";
  }
}

void TimeSeriesLog::write_csv_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write log file: " + path);
  write_csv(out);
}

TimeSeriesLog read_csv_stream(std::istream& in) {
  TimeSeriesLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# inhand log schema", 0) != 0) {
    throw Error("not an inhand log file");
  }
  std::sscanf(line.c_str(), "# inhand log schema %d m=%d n=%d", &log.schema, &log.m, &log.n);
  if (!std::getline(in, line)) throw Error("missing header row");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# event,", 0) == 0) {
      LogEvent ev;
      std::stringstream ss(line.substr(8));
      std::string tok;
      std::getline(ss, ev.kind, ',');
      std::getline(ss, tok, ',');
      ev.t = std::stod(tok);
      std::getline(ss, tok, ',');
      ev.finger = std::stoi(tok);
      std::getline(ss, ev.detail);
      log.events.push_back(ev);
      continue;
    }
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    LogRow r;
    size_t k = 0;
    auto get6 = [&](Vec6& v) {
      for (int i = 0; i < 6; ++i) v[i] = vals.at(k++);
    };
    auto getv = [&](VectorXd& v, int count) {
      v.resize(count);
      for (int i = 0; i < count; ++i) v[i] = vals.at(k++);
    };
    r.t = vals.at(k++);
    for (int i = 0; i < 3; ++i) r.p_o[i] = vals.at(k++);
    get6(r.x);
    get6(r.e);
    get6(r.e_dot);
    get6(r.u_m);
    getv(r.u, log.m);
    getv(r.u_f, 3 * log.n);
    getv(r.gap, log.n);
    getv(r.normal_force, log.n);
    r.constraint_residual = vals.at(k++);
    r.energy = vals.at(k++);
    r.has_diagnostics = vals.at(k++) != 0.0;
    get6(r.psi);
    get6(r.eta);
    r.contraction = vals.at(k++);
    r.m_inv_norm = vals.at(k++);
    r.lambda_min_Ma = vals.at(k++);
    r.decomposition_residual = vals.at(k++);
    r.skew_residual = vals.at(k++);
    log.rows.push_back(std::move(r));
  }
  return log;
}

TimeSeriesLog TimeSeriesLog::read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open log file: " + path);
  return read_csv_stream(in);
}

std::vector<double> TimeSeriesLog::times() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.t);
  return v;
}

std::vector<Vec6> TimeSeriesLog::errors() const {
  std::vector<Vec6> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.e);
  return v;
}

std::vector<Vec6> TimeSeriesLog::error_rates() const {
  std::vector<Vec6> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.e_dot);
  return v;
}

std::vector<Vec6> TimeSeriesLog::psis() const {
  std::vector<Vec6> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.psi);
  return v;
}

}  // namespace inhand::harness
