#pragma once

#include <vector>

#include "inhand/hand_model.hpp"
#include "inhand/types.hpp"

namespace inhand::kinematics {

// Affine map from zero-configuration base coordinates into the world frame.
struct BodyMap {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Vec3 operator()(const Vec3& x) const { return R * x + t; }
  Vec3 inverse(const Vec3& w) const { return R.transpose() * (w - t); }
};

struct FingerKinematics {
  std::vector<Vec3> joint_pos;    // world joint positions
  std::vector<Vec3> joint_axis;   // world joint axes (unit)
  std::vector<BodyMap> body;      // body k map, k = 0..dof (0 = mount)
  Vec3 tip_center = Vec3::Zero(); // world fingertip sphere center

  const BodyMap& tip_body() const { return body.back(); }
};

FingerKinematics finger_fk(const FingerModel& finger, const Eigen::Ref<const VectorXd>& q);

// Geometric Jacobian at the fingertip frame origin: column k maps unit
// joint rate k to (v, omega) of the fingertip body.
Eigen::Matrix<double, 6, Eigen::Dynamic> spatial_jacobian(const FingerModel& finger,
                                                          const Eigen::Ref<const VectorXd>& q);

// [I | -skew(offset)] * J_s: velocity of the material point at `offset` from
// the fingertip frame origin. The true hand Jacobian block uses the contact
// offset p_fc; the approximate one uses the tracked surface-point offset.
MatrixXd hand_jacobian(const Eigen::Ref<const MatrixXd>& J_s, const Vec3& offset);

// 6 x 3n: block i = [I ; skew(p_oc_i)], mapping stacked contact forces to the
// net object wrench. Its transpose maps object twist to contact velocities.
MatrixXd grasp_map(const std::vector<Vec3>& p_oc);

// 6 x 3n built from tracked surface points and their centroid: block i =
// [I ; skew(p_t_i - p_a)]. Depends on joint angles only.
MatrixXd approx_grasp_map(const std::vector<Vec3>& p_t, const Vec3& p_a);

struct TaskFrame {
  Vec3 p_a = Vec3::Zero();
  Mat3 R_pa = Mat3::Identity();
  Vec3 gamma_a = Vec3::Zero();

  Vec6 x() const {
    Vec6 v;
    v << p_a, gamma_a;
    return v;
  }
};

// Orientation parameters of a triad rotation: two folded arctangents plus a
// column-magnitude term. Principal values; see unwrap_gamma for continuity.
Vec3 gamma_from_rotation(const Mat3& R);

// Shifts the pi-periodic components of `gamma` by multiples of pi to the
// branch nearest `previous`.
Vec3 unwrap_gamma(const Vec3& gamma, const Vec3& previous);

// Centroid + triad frame from tracked fingertip points. Uses the first three
// points for the rotation, all points for the centroid.
TaskFrame virtual_frame(const std::vector<Vec3>& p_t);

// gamma_dot = gamma_rate_map(R) * omega. Exposed for the S-matrix oracle.
Mat3 gamma_rate_map(const Mat3& R_pa);

// omega = s_matrix(R) * gamma_dot. Throws OrientationSingularity when the
// parameterization degenerates in either direction.
Mat3 s_matrix(const Mat3& R_pa);

// blockdiag(I3, S).
Mat6 p_matrix(const Mat3& R_pa);

// World positions of the tracked fingertip surface points.
std::vector<Vec3> tracked_points(const HandModel& hand, const VectorXd& q);

// 6 x m Jacobian of the task frame state x = (p_a, gamma_a) with respect to
// q. Translational rows are analytic; orientation rows use central finite
// differences (step 1e-6 rad) with branch-safe differences.
MatrixXd task_jacobian(const HandModel& hand, const VectorXd& q);

// dx/dq * J_h^{-1} * G^T. Throws SingularHand when cond(J_h) > 1e10,
// RankDeficient when dx/dq loses row rank.
Mat6 j_a(const Eigen::Ref<const MatrixXd>& dx_dq, const Eigen::Ref<const MatrixXd>& J_h,
         const Eigen::Ref<const MatrixXd>& G);

// Newton iteration placing the fingertip center at `target`. Throws
// SingularHand if it fails to converge.
VectorXd solve_finger_ik(const FingerModel& finger, const Vec3& target,
                         double tol = 1e-12, int max_iter = 200);

}  // namespace inhand::kinematics
