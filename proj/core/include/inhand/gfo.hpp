#pragma once

#include <string>
#include <vector>

#include "inhand/types.hpp"

namespace inhand::gfo {

struct FrictionCone {
  double mu = 0.5;
  int sides = 8;

  bool valid() const { return mu > 0.0 && sides >= 3; }
};

// Homogeneous facet rows of the inscribed polyhedral cone around
// `inward_normal`: rows * f <= 0 iff f lies inside. The normal lower bound
// f . inward_normal >= f_min is appended separately when building a QP.
MatrixXd linearize_cone(const FrictionCone& cone, const Vec3& inward_normal);

// Minimum-norm v with G_hat v = u_m. Throws RankDeficient when G_hat loses
// row rank.
VectorXd least_norm_forces(const Eigen::Ref<const MatrixXd>& G_hat, const Vec6& u_m);

enum class QPStatus { Optimal, Infeasible, IterationLimit };

struct QPProblem {
  MatrixXd A_eq;   // 6 x 3n
  Vec6 b_eq;
  MatrixXd A_in;   // rows a with a . v <= b
  VectorXd b_in;
};

struct QPSolution {
  VectorXd v;
  std::vector<int> active_set;
  QPStatus status = QPStatus::Optimal;
  double objective = 0.0;
  int most_violated = -1;  // facet row when infeasible
  std::string message;
};

// Dense primal active-set solve of min v'v subject to the problem rows.
QPSolution solve_qp(const QPProblem& prob, const VectorXd& feasible_start);

// Contact-force allocation: min v'v s.t. G_hat v = u_m, inscribed-cone rows
// and a minimum normal force per contact. Infeasibility is reported in the
// solution status together with the most violated facet.
QPSolution gfo_solve(const Eigen::Ref<const MatrixXd>& G_hat, const Vec6& u_m,
                     const std::vector<FrictionCone>& cones,
                     const std::vector<Vec3>& inward_normals, double f_min);

struct KernelReport {
  double Ghat_residual = 0.0;  // ||G_hat u_f||
  double G_residual = 0.0;     // ||G u_f||
  bool kernel_member = false;  // u_f in Ker(G_hat)
  MatrixXd delta_G;            // G - G_hat
};

// Numerical check that internal forces in Ker(G_hat) stay in Ker(G) when the
// tracked points coincide with the contacts.
KernelReport kernel_check(const Eigen::Ref<const MatrixXd>& G,
                          const Eigen::Ref<const MatrixXd>& G_hat, const VectorXd& u_f);

}  // namespace inhand::gfo
