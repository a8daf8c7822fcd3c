#pragma once

#include <optional>
#include <vector>

#include "inhand/dynamics.hpp"
#include "inhand/gfo.hpp"
#include "inhand/hand_model.hpp"
#include "inhand/kinematics.hpp"
#include "inhand/types.hpp"

namespace inhand::control {

// K_p = M(K1 + K2/eps), K_i = M K1/eps, K_d = M(K2 + I/eps).
struct DerivedGains {
  Mat6 Kp, Ki, Kd;
};
DerivedGains gains_from_epsilon(const Mat6& M_bar, const Mat6& K1, const Mat6& K2,
                                double epsilon);

struct GainConfig {
  Mat6 M_bar = Mat6::Identity();
  Mat6 K1 = Mat6::Identity();
  Mat6 K2 = Mat6::Identity();
  double epsilon = 0.0;  // zero when gains were given directly
  Mat6 Kp = Mat6::Zero();
  Mat6 Ki = Mat6::Zero();
  Mat6 Kd = Mat6::Zero();
  double k_f = 0.0;

  static GainConfig from_epsilon(const Mat6& M_bar, const Mat6& K1, const Mat6& K2,
                                 double epsilon, double k_f);
  static GainConfig direct(const Mat6& Kp, const Mat6& Ki, const Mat6& Kd, double k_f);
  bool has_epsilon_form() const { return epsilon > 0.0; }
};

Vec6 pid_manipulation(const Vec6& e, const Vec6& e_int, const Vec6& e_dot,
                      const GainConfig& gains);

struct ReferenceSpec {
  Vec6 delta_r = Vec6::Zero();
  Vec6 tolerance = Vec6::Ones();
};

struct DitherConfig {
  bool enabled = false;
  VectorXd amplitude;  // per joint, N m
  VectorXd offset;     // per joint, N m
  double frequency = 150.0;
  bool gate_on_tolerance = true;
};

// a_j sin(2 pi f t) + b_j per joint; zero when gated inside the tolerance.
VectorXd dither_signal(const DitherConfig& cfg, double t, bool within_tolerance);

// Per-finger {a_j, b_j} defaults for a 3-fingered hand, index/middle/thumb
// order, truncated to `joints_per_finger` entries per finger.
DitherConfig default_dither_table(int joints_per_finger);

// k_f (p_a - p_t_i) stacked; lies in Ker of the approximate grasp map.
VectorXd centroid_internal_force(const std::vector<Vec3>& p_t, const Vec3& p_a, double k_f);

// Gravity feedforward: cancels the modelled hand link gravity torque plus an
// object-weight term routed through the approximate grasp map.
VectorXd exogenous_compensation(const kinematics::HandModel& hand, const VectorXd& q,
                                const Vec3& gravity, double object_mass_estimate,
                                const Eigen::Ref<const MatrixXd>& G_hat, const Mat6& P,
                                const Eigen::Ref<const MatrixXd>& J_h_hat);

enum class TaskFrameMode { Blind, Tactile, OraclePose };
enum class InternalForceMode { Centroid, Gfo };
enum class ControllerKind { Proposed, Baseline };

struct CompensatorConfig {
  bool enabled = false;
  double object_mass_estimate = 0.0;
  bool hand_gravity = true;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
};

struct AntiWindupConfig {
  bool enabled = false;
  double cap = 50.0;                 // componentwise bound on the integral state
  bool freeze_on_saturation = true;  // hold the integral while torque saturates
};

struct GfoConfig {
  gfo::FrictionCone cone;
  double f_min = 0.5;
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::Proposed;
  TaskFrameMode frame = TaskFrameMode::Blind;
  InternalForceMode internal_force = InternalForceMode::Centroid;
  GainConfig gains;
  ReferenceSpec reference;
  DitherConfig dither;
  CompensatorConfig compensators;
  AntiWindupConfig anti_windup;
  GfoConfig gfo;
  double torque_limit = 0.0;  // N m per joint; 0 disables saturation
  bool integrator_gate_on_tolerance = false;
};

// What the controller is allowed to see. Blind mode reads q/qdot only.
struct Observation {
  VectorXd q;
  VectorXd qdot;
  std::vector<Vec3> contact_offsets;  // tactile: measured p_fc per finger, world
  bool has_contacts = false;
  geometry::Pose object_pose;  // oracle-pose mode
  Vec6 object_twist = Vec6::Zero();
  bool has_object_pose = false;
};

struct ControlDebug {
  std::vector<Vec3> p_t;
  Vec3 p_a = Vec3::Zero();
  Mat3 R_frame = Mat3::Identity();
  MatrixXd G_hat;
  MatrixXd J_h_hat;
  MatrixXd dxdq;
  Mat6 P = Mat6::Identity();
};

struct ControlCommand {
  VectorXd u;       // applied joint torque
  Vec6 u_m = Vec6::Zero();
  VectorXd u_f;     // contact-space internal force
  VectorXd u_e;     // exogenous compensation
  VectorXd dither;
  Vec6 x = Vec6::Zero();
  Vec6 e = Vec6::Zero();
  Vec6 e_dot = Vec6::Zero();
  Vec6 e_int = Vec6::Zero();
  bool within_tolerance = false;
  bool saturated = false;
  ControlDebug debug;
};

// Owns the integrator, reference and unwrap state of one closed-loop run.
class ManipulationController {
 public:
  ManipulationController(kinematics::HandModel hand, ControllerConfig config);

  ControlCommand update(const Observation& obs, double t, double dt);

  // Pre-charge the integral state; must be called before the first update.
  void set_initial_integral(const Vec6& e_int0);
  const Vec6& reference() const { return r_; }
  bool initialized() const { return initialized_; }

 private:
  struct Frame {
    kinematics::TaskFrame tf;
    Vec6 x = Vec6::Zero();
    Vec6 e_dot = Vec6::Zero();
    std::vector<Vec3> p_t;
    MatrixXd dxdq;
  };
  Frame build_frame(const Observation& obs);

  kinematics::HandModel hand_;
  ControllerConfig cfg_;
  bool initialized_ = false;
  Vec6 r_ = Vec6::Zero();
  Vec6 integral_ = Vec6::Zero();
  Vec6 pending_integral_ = Vec6::Zero();
  Vec6 prev_e_ = Vec6::Zero();
  Vec3 prev_gamma_ = Vec3::Zero();
  bool prev_saturated_ = false;
};

}  // namespace inhand::control
