#pragma once

#include <utility>
#include <vector>

#include "inhand/geometry.hpp"
#include "inhand/hand_model.hpp"
#include "inhand/kinematics.hpp"
#include "inhand/types.hpp"

namespace inhand::dynamics {

struct ObjectModel {
  double mass = 0.0;
  Mat3 inertia_body = Mat3::Zero();  // body frame, SPD
  geometry::Shape shape;
  geometry::Pose initial_pose;

  void validate() const;
  // Uniform-density inertia of `shape` at this mass.
  static Mat3 uniform_inertia(const geometry::Shape& shape, double mass);
};

struct DisturbanceModel {
  double joint_viscous = 0.0;  // N m s / rad
  Vec3 gravity = Vec3::Zero();
  bool hand_gravity = false;   // apply gravity to the hand links as well
  Vec6 wrench_constant = Vec6::Zero();
  Vec6 wrench_amplitude = Vec6::Zero();
  double wrench_frequency = 0.0;  // Hz

  // Object-side wrench: weight plus the configured extra wrench.
  Vec6 external_wrench(double t, double object_mass) const;
  // Hand-side torque: viscous friction plus optional link gravity.
  VectorXd joint_torque(const kinematics::HandModel& hand, const VectorXd& q,
                        const VectorXd& qdot) const;
  bool time_varying() const { return wrench_amplitude.norm() > 0.0 && wrench_frequency != 0.0; }
};

struct HandObjectState {
  VectorXd q;
  VectorXd qdot;
  geometry::Pose object_pose;
  Vec6 xdot_o = Vec6::Zero();
  std::vector<geometry::ContactGeometry> contacts;
  double t = 0.0;
};

// Contact set, hand Jacobian and grasp map at one configuration.
struct GraspKinematics {
  std::vector<kinematics::FingerKinematics> fk;
  std::vector<geometry::ContactGeometry> contacts;
  std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> J_s;
  MatrixXd J_h;  // 3n x m, block diagonal, contact offsets
  MatrixXd G;    // 6 x 3n

  // J_h^{-1} G^T.
  MatrixXd constraint_map() const;
  VectorXd qdot_from(const Vec6& xdot_o) const;
};

GraspKinematics eval_grasp(const kinematics::HandModel& hand, const geometry::Shape& shape,
                           const geometry::Pose& pose, const VectorXd& q,
                           double gap_tolerance = 1e-4);

// Block-diagonal hand inertia from the cuboid links.
MatrixXd hand_inertia(const kinematics::HandModel& hand, const VectorXd& q);

// Christoffel-form Coriolis matrix built from central differences of the
// per-finger inertia blocks (step 1e-6 rad); Mdot - 2C stays skew-symmetric.
MatrixXd hand_coriolis(const kinematics::HandModel& hand, const VectorXd& q,
                       const VectorXd& qdot);

// M_o = blockdiag(m I, R I_b R^T); C_o = blockdiag(0, skew(omega) R I_b R^T).
std::pair<Mat6, Mat6> object_terms(const ObjectModel& obj, const geometry::Pose& pose,
                                   const Vec6& xdot_o);

// Generalized joint force applied by gravity on the hand links.
VectorXd hand_gravity_torque(const kinematics::HandModel& hand, const VectorXd& q,
                             const Vec3& gravity);
double hand_potential_energy(const kinematics::HandModel& hand, const VectorXd& q,
                             const Vec3& gravity);

struct DynamicsTerms {
  MatrixXd M_h, C_h;
  Mat6 M_o = Mat6::Zero(), C_o = Mat6::Zero();
  Mat6 M_ho = Mat6::Zero(), C_ho = Mat6::Zero();
  MatrixXd B;         // J_h^{-1} G^T
  MatrixXd ddt_B;     // d/dt[J_h^{-1} G^T], directional finite difference
};

// Couples the hand and object terms through the grasp constraint. The time
// derivative of J_h^{-1} G^T is probed along the current (qdot, xdot_o) with
// contacts reprojected inside the probe.
DynamicsTerms assemble_coupled(const kinematics::HandModel& hand, const ObjectModel& obj,
                               const geometry::Pose& pose, const VectorXd& q,
                               const Vec6& xdot_o, const GraspKinematics& gk,
                               double fd_step = 1e-6);

struct ForwardDynamics {
  Vec6 xddot_o = Vec6::Zero();
  VectorXd qddot;
  VectorXd f_c;      // stacked contact forces applied on the object
  VectorXd qdot;     // constraint-consistent joint rates
  DynamicsTerms terms;
};

ForwardDynamics forward_dynamics(const kinematics::HandModel& hand, const ObjectModel& obj,
                                 const geometry::Pose& pose, const VectorXd& q,
                                 const Vec6& xdot_o, const VectorXd& u,
                                 const DisturbanceModel& dist, double t,
                                 double gap_tolerance = 1e-4);

struct StepOptions {
  double dt = 1e-4;
  double gap_tolerance = 1e-4;
  double fd_step = 1e-6;
  bool grasp_checks = true;  // normal force, roll-off and edge detection
};

// One RK4 step with joint rates slaved to the grasp constraint at every
// stage; commits re-projected contacts and re-checks the contact invariants.
HandObjectState step(const kinematics::HandModel& hand, const ObjectModel& obj,
                     const HandObjectState& state, const VectorXd& u,
                     const DisturbanceModel& dist, const StepOptions& opts);

// Kinetic plus configured potential energy (object weight, hand links when
// hand_gravity is set).
double total_energy(const kinematics::HandModel& hand, const ObjectModel& obj,
                    const HandObjectState& state, const DisturbanceModel& dist);

// Compression at each contact: positive pushes into the object surface.
VectorXd contact_normal_forces(const GraspKinematics& gk, const VectorXd& f_c);

}  // namespace inhand::dynamics
