#include "inhand/kinematics.hpp"

#include <cmath>

#include "inhand/errors.hpp"

namespace inhand::kinematics {

namespace {

// arctan(y/x) extended to x = 0; principal values in (-pi/2, pi/2].
double fold_atan(double y, double x) {
  return std::atan2(x >= 0.0 ? y : -y, std::abs(x));
}

double wrap_pi_period(double d) {
  return d - M_PI * std::round(d / M_PI);
}

}  // namespace

FingerKinematics finger_fk(const FingerModel& finger, const Eigen::Ref<const VectorXd>& q) {
  const int dof = finger.dof();
  FingerKinematics fk;
  fk.joint_pos.resize(dof);
  fk.joint_axis.resize(dof);
  fk.body.resize(dof + 1);
  fk.body[0].R = finger.base_pose.rotation;
  fk.body[0].t = finger.base_pose.position;
  for (int k = 0; k < dof; ++k) {
    const BodyMap& prev = fk.body[k];
    fk.joint_pos[k] = prev(finger.joints[k].origin);
    fk.joint_axis[k] = prev.R * finger.joints[k].axis;
    const Mat3 Rj = rotation_exp(q[k] * finger.joints[k].axis);
    // rot about the joint in zero-config coordinates, composed with prev.
    fk.body[k + 1].R = prev.R * Rj;
    fk.body[k + 1].t = prev.t + prev.R * (finger.joints[k].origin - Rj * finger.joints[k].origin);
  }
  fk.tip_center = fk.body[dof](finger.fingertip_center0);
  return fk;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> spatial_jacobian(const FingerModel& finger,
                                                          const Eigen::Ref<const VectorXd>& q) {
  const FingerKinematics fk = finger_fk(finger, q);
  const int dof = finger.dof();
  Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, dof);
  for (int k = 0; k < dof; ++k) {
    J.col(k).head<3>() = fk.joint_axis[k].cross(fk.tip_center - fk.joint_pos[k]);
    J.col(k).tail<3>() = fk.joint_axis[k];
  }
  return J;
}

MatrixXd hand_jacobian(const Eigen::Ref<const MatrixXd>& J_s, const Vec3& offset) {
  MatrixXd J(3, J_s.cols());
  J = J_s.topRows(3) - skew(offset) * J_s.bottomRows(3);
  return J;
}

MatrixXd grasp_map(const std::vector<Vec3>& p_oc) {
  const int n = static_cast<int>(p_oc.size());
  MatrixXd G = MatrixXd::Zero(6, 3 * n);
  for (int i = 0; i < n; ++i) {
    G.block<3, 3>(0, 3 * i) = Mat3::Identity();
    G.block<3, 3>(3, 3 * i) = skew(p_oc[i]);
  }
  return G;
}

MatrixXd approx_grasp_map(const std::vector<Vec3>& p_t, const Vec3& p_a) {
  const int n = static_cast<int>(p_t.size());
  MatrixXd G = MatrixXd::Zero(6, 3 * n);
  for (int i = 0; i < n; ++i) {
    G.block<3, 3>(0, 3 * i) = Mat3::Identity();
    G.block<3, 3>(3, 3 * i) = skew(p_t[i] - p_a);
  }
  return G;
}

Vec3 gamma_from_rotation(const Mat3& R) {
  const Vec3 rho_x = R.col(0);
  const Vec3 rho_y = R.col(1);
  const Vec3 rho_z = R.col(2);
  Vec3 g;
  g[0] = fold_atan(-rho_z[1], rho_z[2]);
  g[1] = std::sqrt(std::max(0.0, 1.0 - rho_z[0] * rho_z[0]));
  g[2] = fold_atan(-rho_y[0], rho_x[0]);
  return g;
}

Vec3 unwrap_gamma(const Vec3& gamma, const Vec3& previous) {
  Vec3 g = gamma;
  for (int i : {0, 2}) {
    g[i] = previous[i] + wrap_pi_period(gamma[i] - previous[i]);
  }
  return g;
}

TaskFrame virtual_frame(const std::vector<Vec3>& p_t) {
  const int n = static_cast<int>(p_t.size());
  if (n < 3) throw DegenerateFrame("frame needs at least three fingertip points");
  TaskFrame tf;
  tf.p_a = Vec3::Zero();
  for (const auto& p : p_t) tf.p_a += p;
  tf.p_a /= static_cast<double>(n);

  const Vec3 d12 = p_t[0] - p_t[1];
  if (d12.norm() < 1e-12) throw DegenerateFrame("first two fingertip points coincide");
  const Vec3 rho_y = d12 / d12.norm();
  const Vec3 cr = (p_t[2] - p_t[0]).cross(p_t[1] - p_t[0]);
  if (cr.norm() < 1e-10) throw DegenerateFrame("fingertip points are collinear");
  const Vec3 rho_z = cr / cr.norm();
  const Vec3 rho_x = rho_y.cross(rho_z);
  tf.R_pa.col(0) = rho_x;
  tf.R_pa.col(1) = rho_y;
  tf.R_pa.col(2) = rho_z;
  tf.gamma_a = gamma_from_rotation(tf.R_pa);
  return tf;
}

Mat3 gamma_rate_map(const Mat3& R_pa) {
  const Vec3 z = R_pa.col(2);
  const double s2 = 1.0 - z[0] * z[0];
  if (s2 < 1e-16) {
    throw OrientationSingularity("first triad-normal component at +-1");
  }
  const double s = std::sqrt(s2);
  Mat3 T;
  T.row(0) << 1.0, -z[0] * z[1] / s2, -z[0] * z[2] / s2;
  T.row(1) << 0.0, -z[0] * z[2] / s, z[0] * z[1] / s;
  T.row(2) << 0.0, z[1] / s2, z[2] / s2;
  return T;
}

Mat3 s_matrix(const Mat3& R_pa) {
  const Mat3 T = gamma_rate_map(R_pa);
  const double detT = T.determinant();  // equals -z1/sqrt(1-z1^2)
  if (std::abs(detT) < 1e-10) {
    throw OrientationSingularity("gamma rate map is singular");
  }
  if (std::abs(1.0 / detT) <= 1e-8) {
    throw OrientationSingularity("S matrix is singular");
  }
  return T.inverse();
}

Mat6 p_matrix(const Mat3& R_pa) {
  Mat6 P = Mat6::Identity();
  P.block<3, 3>(3, 3) = s_matrix(R_pa);
  return P;
}

std::vector<Vec3> tracked_points(const HandModel& hand, const VectorXd& q) {
  std::vector<Vec3> pts;
  pts.reserve(hand.fingers.size());
  for (size_t i = 0; i < hand.fingers.size(); ++i) {
    const auto& f = hand.fingers[i];
    const FingerKinematics fk = finger_fk(f, hand.finger_q(static_cast<int>(i), q));
    pts.push_back(fk.tip_body()(f.fingertip_center0 + f.p_ft_offset0));
  }
  return pts;
}

MatrixXd task_jacobian(const HandModel& hand, const VectorXd& q) {
  const int n = hand.contact_count();
  const int m = hand.joint_count();
  MatrixXd dxdq = MatrixXd::Zero(6, m);

  // Translational rows: mean of the tracked-point Jacobians.
  for (int i = 0; i < n; ++i) {
    const auto& f = hand.fingers[i];
    const VectorXd qi = hand.finger_q(i, q);
    const auto Js = spatial_jacobian(f, qi);
    const FingerKinematics fk = finger_fk(f, qi);
    const Vec3 offset = fk.tip_body().R * (f.fingertip_center0 + f.p_ft_offset0) +
                        fk.tip_body().t - fk.tip_center;
    dxdq.block(0, hand.joint_offset(i), 3, f.dof()) = hand_jacobian(Js, offset) / double(n);
  }

  // Orientation rows by central differences with branch-safe differences.
  const double h = 1e-6;
  VectorXd qp = q;
  for (int l = 0; l < m; ++l) {
    qp[l] = q[l] + h;
    const Vec3 gp = virtual_frame(tracked_points(hand, qp)).gamma_a;
    qp[l] = q[l] - h;
    const Vec3 gm = virtual_frame(tracked_points(hand, qp)).gamma_a;
    qp[l] = q[l];
    Vec3 dg = gp - gm;
    dg[0] = wrap_pi_period(dg[0]);
    dg[2] = wrap_pi_period(dg[2]);
    dxdq.block<3, 1>(3, l) = dg / (2.0 * h);
  }

  Eigen::JacobiSVD<MatrixXd> svd(dxdq);
  if (svd.singularValues().minCoeff() < 1e-8) {
    throw RankDeficient("task frame Jacobian lost row rank");
  }
  return dxdq;
}

Mat6 j_a(const Eigen::Ref<const MatrixXd>& dx_dq, const Eigen::Ref<const MatrixXd>& J_h,
         const Eigen::Ref<const MatrixXd>& G) {
  Eigen::JacobiSVD<MatrixXd> svd(J_h);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e10) {
    throw SingularHand();
  }
  Eigen::PartialPivLU<MatrixXd> lu(J_h);
  return dx_dq * lu.solve(G.transpose());
}

VectorXd solve_finger_ik(const FingerModel& finger, const Vec3& target, double tol, int max_iter) {
  VectorXd q = finger.ik_seed.size() == finger.dof() ? finger.ik_seed
                                                     : VectorXd::Zero(finger.dof());
  for (int it = 0; it < max_iter; ++it) {
    const FingerKinematics fk = finger_fk(finger, q);
    const Vec3 err = fk.tip_center - target;
    if (err.norm() < tol) return q;
    const auto Js = spatial_jacobian(finger, q);
    const MatrixXd Jv = Js.topRows(3);
    // damped least squares step
    const MatrixXd JJt = Jv * Jv.transpose() + 1e-10 * Mat3::Identity();
    q -= Jv.transpose() * JJt.ldlt().solve(err);
  }
  throw SingularHand("finger IK did not converge for '" + finger.name + "'");
}

}  // namespace inhand::kinematics
