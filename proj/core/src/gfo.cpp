#include "inhand/gfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inhand/errors.hpp"

namespace inhand::gfo {

namespace {

void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  t1 = n.cross(helper).normalized();
  t2 = n.cross(t1);
}

}  // namespace

MatrixXd linearize_cone(const FrictionCone& cone, const Vec3& inward_normal) {
  const Vec3 n = inward_normal.normalized();
  Vec3 t1, t2;
  tangent_basis(n, t1, t2);
  const int k = cone.sides;
  const double mu_in = cone.mu * std::cos(M_PI / k);
  MatrixXd rows(k, 3);
  for (int j = 0; j < k; ++j) {
    const double theta = 2.0 * M_PI * (j + 0.5) / k;
    const Vec3 mid = std::cos(theta) * t1 + std::sin(theta) * t2;
    rows.row(j) = (mid - mu_in * n).transpose();
  }
  return rows;
}

VectorXd least_norm_forces(const Eigen::Ref<const MatrixXd>& G_hat, const Vec6& u_m) {
  Eigen::JacobiSVD<MatrixXd> svd(G_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() < 1e-10) {
    throw RankDeficient("grasp map lost row rank");
  }
  const Mat6 GGt = G_hat * G_hat.transpose();
  return G_hat.transpose() * GGt.llt().solve(u_m);
}

QPSolution solve_qp(const QPProblem& prob, const VectorXd& feasible_start) {
  const int dim = static_cast<int>(prob.A_eq.cols());
  const int n_in = static_cast<int>(prob.A_in.rows());
  const double tol = 1e-10;

  QPSolution sol;
  sol.v = feasible_start;
  std::vector<int> W;

  auto solve_eqp = [&](const std::vector<int>& work) {
    const int rows = 6 + static_cast<int>(work.size());
    MatrixXd C(rows, dim);
    VectorXd d(rows);
    C.topRows(6) = prob.A_eq;
    d.head(6) = prob.b_eq;
    for (size_t k = 0; k < work.size(); ++k) {
      C.row(6 + k) = prob.A_in.row(work[k]);
      d[6 + k] = prob.b_in[work[k]];
    }
    // pure least-norm objective: the EQP optimum is the min-norm solution
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(C);
    return VectorXd(cod.solve(d));
  };

  bool converged = false;
  for (int iter = 0; iter < 100 + 10 * n_in; ++iter) {
    const VectorXd target = solve_eqp(W);
    const VectorXd dir = target - sol.v;

    if (dir.norm() <= 1e-11 * (1.0 + sol.v.norm())) {
      // stationary on the working set; check multipliers
      if (W.empty()) {
        converged = true;
        break;
      }
      MatrixXd Ct(dim, 6 + W.size());
      Ct.leftCols(6) = prob.A_eq.transpose();
      for (size_t k = 0; k < W.size(); ++k) Ct.col(6 + k) = prob.A_in.row(W[k]).transpose();
      const VectorXd lam = Ct.completeOrthogonalDecomposition().solve(-2.0 * sol.v);
      int drop = -1;
      double most_negative = -1e-9;
      for (size_t k = 0; k < W.size(); ++k) {
        if (lam[6 + k] < most_negative) {
          most_negative = lam[6 + k];
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) {
        converged = true;  // KKT satisfied
        break;
      }
      W.erase(W.begin() + drop);
      continue;
    }

    // ratio test against rows not in the working set
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < n_in; ++i) {
      if (std::find(W.begin(), W.end(), i) != W.end()) continue;
      const double ad = prob.A_in.row(i).dot(dir);
      if (ad > tol) {
        const double slack = prob.b_in[i] - prob.A_in.row(i).dot(sol.v);
        const double a = slack / ad;
        if (a < alpha - 1e-14) {
          alpha = std::max(0.0, a);
          blocking = i;
        }
      }
    }
    sol.v += alpha * dir;
    if (blocking >= 0) {
      W.push_back(blocking);
    } else {
      // full step to the EQP optimum
      continue;
    }
    if (static_cast<int>(W.size()) > dim) {
      sol.status = QPStatus::IterationLimit;
      sol.message = "working set exceeded problem dimension";
      return sol;
    }
  }

  sol.active_set = W;
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.objective = sol.v.squaredNorm();
  sol.status = converged ? QPStatus::Optimal : QPStatus::IterationLimit;
  if (!converged) sol.message = "active-set iteration limit";
  return sol;
}

QPSolution gfo_solve(const Eigen::Ref<const MatrixXd>& G_hat, const Vec6& u_m,
                     const std::vector<FrictionCone>& cones,
                     const std::vector<Vec3>& inward_normals, double f_min) {
  const int n = static_cast<int>(cones.size());
  const int dim = 3 * n;

  QPProblem prob;
  prob.A_eq = G_hat;
  prob.b_eq = u_m;
  int rows = 0;
  for (const auto& c : cones) rows += c.sides + 1;
  prob.A_in = MatrixXd::Zero(rows, dim);
  prob.b_in = VectorXd::Zero(rows);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    const MatrixXd facets = linearize_cone(cones[i], inward_normals[i]);
    prob.A_in.block(r, 3 * i, cones[i].sides, 3) = facets;
    r += cones[i].sides;
    // normal force lower bound: -n . f <= -f_min
    prob.A_in.block(r, 3 * i, 1, 3) = -inward_normals[i].normalized().transpose();
    prob.b_in[r] = -f_min;
    ++r;
  }

  // Feasible start: least-norm point pushed along the internal-force kernel
  // direction recovered from the grasp-map moment blocks.
  const VectorXd v_ln = least_norm_forces(G_hat, u_m);
  VectorXd z = VectorXd::Zero(dim);
  for (int i = 0; i < n; ++i) {
    const Mat3 S = G_hat.block<3, 3>(3, 3 * i);
    z.segment<3>(3 * i) = -unskew(S);  // p_a - p_t_i
  }
  QPSolution sol;
  if (z.norm() < 1e-12) {
    sol.status = QPStatus::Infeasible;
    sol.message = "no internal-force direction available";
    return sol;
  }
  z.normalize();

  double lo = 0.0;
  for (int i = 0; i < prob.A_in.rows(); ++i) {
    const double az = prob.A_in.row(i).dot(z);
    const double slack = prob.b_in[i] - prob.A_in.row(i).dot(v_ln);
    if (az < -1e-12) lo = std::max(lo, -slack / (-az));
  }
  VectorXd v0 = v_ln + lo * z;

  // Repair any remaining violations inside the equality kernel.
  Eigen::FullPivLU<MatrixXd> lu(G_hat);
  lu.setThreshold(1e-10);
  const MatrixXd Z = lu.kernel();
  int worst = -1;
  for (int iter = 0; iter < 500; ++iter) {
    VectorXd viol = prob.A_in * v0 - prob.b_in;
    double vmax = viol.maxCoeff(&worst);
    if (vmax <= 1e-12) {
      worst = -1;
      break;
    }
    const VectorXd a = prob.A_in.row(worst).transpose();
    const VectorXd d = -(Z * (Z.transpose() * a));
    const double ad = a.dot(d);
    if (ad > -1e-14) break;  // violation not reducible inside the kernel
    v0 += d * (vmax + 1e-9) / (-ad);
  }
  if (worst >= 0) {
    sol.status = QPStatus::Infeasible;
    sol.most_violated = worst;
    sol.v = v0;
    sol.message = "friction cone constraints cannot be met";
    return sol;
  }

  sol = solve_qp(prob, v0);
  return sol;
}

KernelReport kernel_check(const Eigen::Ref<const MatrixXd>& G,
                          const Eigen::Ref<const MatrixXd>& G_hat, const VectorXd& u_f) {
  KernelReport rep;
  rep.Ghat_residual = (G_hat * u_f).norm();
  rep.G_residual = (G * u_f).norm();
  rep.kernel_member = rep.Ghat_residual <= 1e-12 * std::max(1.0, u_f.norm());
  rep.delta_G = G - G_hat;
  return rep;
}

}  // namespace inhand::gfo
