#include "inhand/control.hpp"

#include <cmath>

#include "inhand/errors.hpp"

namespace inhand::control {

using kinematics::HandModel;

DerivedGains gains_from_epsilon(const Mat6& M_bar, const Mat6& K1, const Mat6& K2,
                                double epsilon) {
  if (epsilon <= 0.0) throw NonPositiveEpsilon();
  DerivedGains g;
  g.Kp = M_bar * (K1 + K2 / epsilon);
  g.Ki = M_bar * K1 / epsilon;
  g.Kd = M_bar * (K2 + Mat6::Identity() / epsilon);
  return g;
}

GainConfig GainConfig::from_epsilon(const Mat6& M_bar, const Mat6& K1, const Mat6& K2,
                                    double epsilon, double k_f) {
  GainConfig g;
  g.M_bar = M_bar;
  g.K1 = K1;
  g.K2 = K2;
  g.epsilon = epsilon;
  const DerivedGains d = gains_from_epsilon(M_bar, K1, K2, epsilon);
  g.Kp = d.Kp;
  g.Ki = d.Ki;
  g.Kd = d.Kd;
  g.k_f = k_f;
  return g;
}

GainConfig GainConfig::direct(const Mat6& Kp, const Mat6& Ki, const Mat6& Kd, double k_f) {
  GainConfig g;
  g.Kp = Kp;
  g.Ki = Ki;
  g.Kd = Kd;
  g.k_f = k_f;
  return g;
}

Vec6 pid_manipulation(const Vec6& e, const Vec6& e_int, const Vec6& e_dot,
                      const GainConfig& gains) {
  return -gains.Kp * e - gains.Ki * e_int - gains.Kd * e_dot;
}

VectorXd dither_signal(const DitherConfig& cfg, double t, bool within_tolerance) {
  const int m = static_cast<int>(cfg.amplitude.size());
  if (!cfg.enabled || (cfg.gate_on_tolerance && within_tolerance)) {
    return VectorXd::Zero(m);
  }
  return cfg.amplitude * std::sin(2.0 * M_PI * cfg.frequency * t) + cfg.offset;
}

DitherConfig default_dither_table(int joints_per_finger) {
  // index, middle, thumb; per-joint amplitude / dc offset in N m
  const double amp[3][4] = {{0.0990, 0.0873, 0.0936, 0.0828},
                            {0.0981, 0.0639, 0.0747, 0.0648},
                            {0.1152, 0.0720, 0.1224, 0.0648}};
  const double off[3][4] = {{-0.0110, -0.0255, -0.0260, -0.0140},
                            {-0.0175, -0.0045, -0.0065, -0.0040},
                            {-0.0250, -0.0130, -0.0180, 0.0010}};
  DitherConfig cfg;
  cfg.frequency = 150.0;
  const int jpf = std::min(joints_per_finger, 4);
  cfg.amplitude.resize(3 * jpf);
  cfg.offset.resize(3 * jpf);
  for (int f = 0; f < 3; ++f) {
    for (int j = 0; j < jpf; ++j) {
      cfg.amplitude[f * jpf + j] = amp[f][j];
      cfg.offset[f * jpf + j] = off[f][j];
    }
  }
  return cfg;
}

VectorXd centroid_internal_force(const std::vector<Vec3>& p_t, const Vec3& p_a, double k_f) {
  const int n = static_cast<int>(p_t.size());
  VectorXd u_f(3 * n);
  for (int i = 0; i < n; ++i) {
    u_f.segment<3>(3 * i) = k_f * (p_a - p_t[i]);
  }
  return u_f;
}

namespace {

// Right inverse of a full-row-rank 6 x 3n matrix.
MatrixXd right_pinv(const MatrixXd& A) {
  const Mat6 AAt = A * A.transpose();
  Eigen::LDLT<Mat6> ldlt(AAt);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-14) {
    throw RankDeficient("approximate grasp map lost row rank");
  }
  return A.transpose() * ldlt.solve(Mat6::Identity());
}

}  // namespace

VectorXd exogenous_compensation(const HandModel& hand, const VectorXd& q, const Vec3& gravity,
                                double object_mass_estimate,
                                const Eigen::Ref<const MatrixXd>& G_hat, const Mat6& P,
                                const Eigen::Ref<const MatrixXd>& J_h_hat) {
  VectorXd u_e = -dynamics::hand_gravity_torque(hand, q, gravity);
  if (object_mass_estimate > 0.0) {
    Vec6 w_hat = Vec6::Zero();
    w_hat.head<3>() = object_mass_estimate * gravity;
    const MatrixXd pinv = right_pinv(P.transpose() * G_hat);
    u_e += J_h_hat.transpose() * (pinv * (-w_hat));
  }
  return u_e;
}

ManipulationController::ManipulationController(HandModel hand, ControllerConfig config)
    : hand_(std::move(hand)), cfg_(std::move(config)) {
  if (cfg_.kind == ControllerKind::Baseline) {
    cfg_.gains.Ki.setZero();
    cfg_.dither.enabled = false;
    cfg_.compensators.enabled = false;
  }
}

void ManipulationController::set_initial_integral(const Vec6& e_int0) {
  pending_integral_ = e_int0;
  if (!initialized_) integral_ = e_int0;
}

ManipulationController::Frame ManipulationController::build_frame(const Observation& obs) {
  Frame fr;
  if (cfg_.frame == TaskFrameMode::OraclePose) {
    if (!obs.has_object_pose) throw Error("oracle-pose mode needs object pose measurements");
    fr.tf.p_a = obs.object_pose.position;
    fr.tf.R_pa = obs.object_pose.rotation;
    fr.tf.gamma_a = kinematics::gamma_from_rotation(fr.tf.R_pa);
    fr.p_t = kinematics::tracked_points(hand_, obs.q);
    fr.dxdq.resize(0, 0);
    return fr;
  }
  if (cfg_.frame == TaskFrameMode::Tactile) {
    if (!obs.has_contacts) throw Error("tactile mode needs contact measurements");
    for (size_t i = 0; i < hand_.fingers.size(); ++i) {
      auto& f = hand_.fingers[i];
      const auto fk = kinematics::finger_fk(f, hand_.finger_q(static_cast<int>(i), obs.q));
      const Vec3 contact_world = fk.tip_center + obs.contact_offsets[i];
      f.p_ft_offset0 = fk.tip_body().inverse(contact_world) - f.fingertip_center0;
    }
  }
  fr.p_t = kinematics::tracked_points(hand_, obs.q);
  fr.tf = kinematics::virtual_frame(fr.p_t);
  fr.dxdq = kinematics::task_jacobian(hand_, obs.q);
  return fr;
}

ControlCommand ManipulationController::update(const Observation& obs, double t, double dt) {
  const int m = hand_.joint_count();
  const int n = hand_.contact_count();

  const bool first = !initialized_;
  Frame fr = build_frame(obs);
  if (!first) {
    fr.tf.gamma_a = kinematics::unwrap_gamma(fr.tf.gamma_a, prev_gamma_);
  }
  prev_gamma_ = fr.tf.gamma_a;
  fr.x << fr.tf.p_a, fr.tf.gamma_a;

  const Mat6 P = kinematics::p_matrix(fr.tf.R_pa);
  if (cfg_.frame == TaskFrameMode::OraclePose) {
    Vec6 xdot;
    xdot.head<3>() = obs.object_twist.head<3>();
    xdot.tail<3>() = P.block<3, 3>(3, 3).inverse() * obs.object_twist.tail<3>();
    fr.e_dot = xdot;
  } else {
    fr.e_dot = fr.dxdq * obs.qdot;
  }

  if (first) {
    r_ = fr.x + cfg_.reference.delta_r;
    integral_ = pending_integral_;
    initialized_ = true;
  }

  ControlCommand cmd;
  cmd.x = fr.x;
  cmd.e = fr.x - r_;
  cmd.e_dot = fr.e_dot;
  cmd.within_tolerance =
      ((cmd.e.cwiseAbs().array() <= cfg_.reference.tolerance.array()).all());

  // trapezoidal accumulation at the control rate
  const bool freeze = (cfg_.anti_windup.enabled && cfg_.anti_windup.freeze_on_saturation &&
                       prev_saturated_) ||
                      (cfg_.integrator_gate_on_tolerance && cmd.within_tolerance);
  if (!first && !freeze) {
    integral_ += 0.5 * dt * (prev_e_ + cmd.e);
  }
  if (cfg_.anti_windup.enabled) {
    integral_ = integral_.cwiseMax(-cfg_.anti_windup.cap).cwiseMin(cfg_.anti_windup.cap);
  }
  prev_e_ = cmd.e;
  cmd.e_int = integral_;

  cmd.u_m = pid_manipulation(cmd.e, cmd.e_int, cmd.e_dot, cfg_.gains);

  // approximate kinematics from tracked points only
  MatrixXd J_h_hat = MatrixXd::Zero(3 * n, m);
  for (int i = 0; i < n; ++i) {
    const auto& f = hand_.fingers[i];
    const VectorXd qi = hand_.finger_q(i, obs.q);
    const auto Js = kinematics::spatial_jacobian(f, qi);
    const auto fk = kinematics::finger_fk(f, qi);
    const Vec3 offset = fr.p_t[i] - fk.tip_center;
    J_h_hat.block(3 * i, hand_.joint_offset(i), 3, f.dof()) =
        kinematics::hand_jacobian(Js, offset);
  }
  const MatrixXd G_hat = kinematics::approx_grasp_map(fr.p_t, fr.tf.p_a);

  if (cfg_.internal_force == InternalForceMode::Centroid) {
    cmd.u_f = centroid_internal_force(fr.p_t, fr.tf.p_a, cfg_.gains.k_f);
    const MatrixXd pinv = right_pinv(P.transpose() * G_hat);
    cmd.u = J_h_hat.transpose() * (pinv * cmd.u_m + cmd.u_f);
  } else {
    std::vector<gfo::FrictionCone> cones(n, cfg_.gfo.cone);
    std::vector<Vec3> inward(n);
    for (int i = 0; i < n; ++i) {
      if (cfg_.frame == TaskFrameMode::Tactile && obs.has_contacts) {
        inward[i] = obs.contact_offsets[i].normalized();
      } else {
        inward[i] = (fr.tf.p_a - fr.p_t[i]).normalized();
      }
    }
    const gfo::QPSolution sol =
        gfo::gfo_solve(G_hat, cmd.u_m, cones, inward, cfg_.gfo.f_min);
    if (sol.status != gfo::QPStatus::Optimal) {
      throw GraspFailure("grasp force optimization infeasible (facet " +
                             std::to_string(sol.most_violated) + ")",
                         t);
    }
    const MatrixXd pinv = right_pinv(P.transpose() * G_hat);
    cmd.u = J_h_hat.transpose() * sol.v;
    cmd.u_f = sol.v - pinv * cmd.u_m;
  }

  if (cfg_.compensators.enabled) {
    cmd.u_e = exogenous_compensation(hand_, obs.q, cfg_.compensators.gravity,
                                     cfg_.compensators.object_mass_estimate, G_hat, P,
                                     J_h_hat);
    if (!cfg_.compensators.hand_gravity) {
      cmd.u_e += dynamics::hand_gravity_torque(hand_, obs.q, cfg_.compensators.gravity);
    }
    cmd.u += cmd.u_e;
  } else {
    cmd.u_e = VectorXd::Zero(m);
  }

  if (cfg_.dither.enabled) {
    cmd.dither = dither_signal(cfg_.dither, t, cmd.within_tolerance);
    cmd.u += cmd.dither;
  } else {
    cmd.dither = VectorXd::Zero(m);
  }

  if (cfg_.torque_limit > 0.0) {
    cmd.saturated = (cmd.u.cwiseAbs().array() > cfg_.torque_limit).any();
    cmd.u = cmd.u.cwiseMax(-cfg_.torque_limit).cwiseMin(cfg_.torque_limit);
  }
  prev_saturated_ = cmd.saturated;

  cmd.debug.p_t = fr.p_t;
  cmd.debug.p_a = fr.tf.p_a;
  cmd.debug.R_frame = fr.tf.R_pa;
  cmd.debug.G_hat = G_hat;
  cmd.debug.J_h_hat = J_h_hat;
  cmd.debug.dxdq = fr.dxdq;
  cmd.debug.P = P;
  return cmd;
}

}  // namespace inhand::control
