#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "inhand/types.hpp"

namespace inhand::harness {

struct LogRow {
  double t = 0.0;
  Vec3 p_o = Vec3::Zero();  // object position
  Vec6 x = Vec6::Zero();
  Vec6 e = Vec6::Zero();
  Vec6 e_dot = Vec6::Zero();
  Vec6 u_m = Vec6::Zero();
  VectorXd u;
  VectorXd u_f;
  VectorXd gap;
  VectorXd normal_force;
  double constraint_residual = 0.0;
  double energy = 0.0;
  bool has_diagnostics = false;
  Vec6 psi = Vec6::Zero();
  Vec6 eta = Vec6::Zero();
  double contraction = 0.0;
  double m_inv_norm = 0.0;
  double lambda_min_Ma = 0.0;
  double decomposition_residual = 0.0;
  double skew_residual = 0.0;
};

struct LogEvent {
  std::string kind;
  double t = 0.0;
  int finger = -1;
  std::string detail;
};

struct TimeSeriesLog {
  int schema = 1;
  int m = 0;  // joints
  int n = 0;  // contacts
  std::vector<LogRow> rows;
  std::vector<LogEvent> events;

  std::vector<std::string> column_names() const;
  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
  static TimeSeriesLog read_csv_file(const std::string& path);

  std::vector<double> times() const;
  std::vector<Vec6> errors() const;
  std::vector<Vec6> error_rates() const;
  std::vector<Vec6> psis() const;
};

}  // namespace inhand::harness
