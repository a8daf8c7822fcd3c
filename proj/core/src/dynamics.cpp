#include "inhand/dynamics.hpp"

#include <cmath>

#include "inhand/errors.hpp"

namespace inhand::dynamics {

using kinematics::FingerKinematics;
using kinematics::FingerModel;
using kinematics::HandModel;

void ObjectModel::validate() const {
  if (mass <= 0.0) throw ConfigError("object.mass", "mass must be positive");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia_body);
  const Vec3 ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw ConfigError("object.inertia", "inertia must be positive definite");
  // principal moments obey the triangle inequality
  if (ev[0] + ev[1] < ev[2] * (1.0 - 1e-9))
    throw ConfigError("object.inertia", "principal moments violate the triangle inequality");
  if (!shape.valid()) throw ConfigError("object.shape", "invalid shape");
  if (!initial_pose.valid(1e-9)) throw ConfigError("object.pose", "not a proper rotation");
}

Mat3 ObjectModel::uniform_inertia(const geometry::Shape& shape, double mass) {
  Mat3 I = Mat3::Zero();
  switch (shape.kind) {
    case geometry::Shape::Kind::Sphere: {
      const double v = 0.4 * mass * shape.radius * shape.radius;
      I = v * Mat3::Identity();
      break;
    }
    case geometry::Shape::Kind::Box: {
      const Vec3 d = 2.0 * shape.half_extents;
      I(0, 0) = mass / 12.0 * (d.y() * d.y() + d.z() * d.z());
      I(1, 1) = mass / 12.0 * (d.x() * d.x() + d.z() * d.z());
      I(2, 2) = mass / 12.0 * (d.x() * d.x() + d.y() * d.y());
      break;
    }
  }
  return I;
}

Vec6 DisturbanceModel::external_wrench(double t, double object_mass) const {
  Vec6 w = wrench_constant;
  w.head<3>() += object_mass * gravity;
  if (time_varying()) {
    w += wrench_amplitude * std::sin(2.0 * M_PI * wrench_frequency * t);
  }
  return w;
}

VectorXd DisturbanceModel::joint_torque(const HandModel& hand, const VectorXd& q,
                                        const VectorXd& qdot) const {
  VectorXd tau = -joint_viscous * qdot;
  if (hand_gravity) tau += hand_gravity_torque(hand, q, gravity);
  return tau;
}

MatrixXd GraspKinematics::constraint_map() const {
  return Eigen::PartialPivLU<MatrixXd>(J_h).solve(G.transpose());
}

VectorXd GraspKinematics::qdot_from(const Vec6& xdot_o) const {
  return Eigen::PartialPivLU<MatrixXd>(J_h).solve(G.transpose() * xdot_o);
}

GraspKinematics eval_grasp(const HandModel& hand, const geometry::Shape& shape,
                           const geometry::Pose& pose, const VectorXd& q,
                           double gap_tolerance) {
  const int n = hand.contact_count();
  const int m = hand.joint_count();
  GraspKinematics gk;
  gk.fk.reserve(n);
  gk.contacts.reserve(n);
  gk.J_s.reserve(n);
  gk.J_h = MatrixXd::Zero(3 * n, m);
  std::vector<Vec3> p_oc(n);
  for (int i = 0; i < n; ++i) {
    const FingerModel& f = hand.fingers[i];
    const VectorXd qi = hand.finger_q(i, q);
    FingerKinematics fk = kinematics::finger_fk(f, qi);
    geometry::ContactGeometry cg;
    try {
      cg = geometry::update_contact(fk.tip_center, f.fingertip_radius, shape, pose, gap_tolerance);
    } catch (ContactLost& e) {
      e.finger = i;
      throw;
    }
    Eigen::Matrix<double, 6, Eigen::Dynamic> Js(6, f.dof());
    for (int k = 0; k < f.dof(); ++k) {
      Js.col(k).head<3>() = fk.joint_axis[k].cross(fk.tip_center - fk.joint_pos[k]);
      Js.col(k).tail<3>() = fk.joint_axis[k];
    }
    gk.J_h.block(3 * i, hand.joint_offset(i), 3, f.dof()) =
        kinematics::hand_jacobian(Js, cg.p_fc);
    p_oc[i] = cg.p_oc;
    gk.fk.push_back(std::move(fk));
    gk.contacts.push_back(cg);
    gk.J_s.push_back(std::move(Js));
  }
  gk.G = kinematics::grasp_map(p_oc);
  return gk;
}

namespace {

struct LinkFrame {
  Vec3 center0;
  Mat3 axes0;       // columns: length axis and cross axes, zero config
  Vec3 principal;   // inertia about those axes at the center
};

LinkFrame link_frame(const kinematics::LinkSegment& link) {
  LinkFrame lf;
  lf.center0 = 0.5 * (link.start + link.end);
  const double L = link.length();
  const Vec3 u = (link.end - link.start) / L;
  const Vec3 helper = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 v = u.cross(helper).normalized();
  const Vec3 w = u.cross(v);
  lf.axes0.col(0) = u;
  lf.axes0.col(1) = v;
  lf.axes0.col(2) = w;
  const double m12 = link.mass / 12.0;
  lf.principal = Vec3(m12 * (link.width * link.width + link.depth * link.depth),
                      m12 * (L * L + link.depth * link.depth),
                      m12 * (L * L + link.width * link.width));
  return lf;
}

MatrixXd finger_inertia(const FingerModel& finger, const VectorXd& qi) {
  const int dof = finger.dof();
  const FingerKinematics fk = kinematics::finger_fk(finger, qi);
  MatrixXd M = MatrixXd::Zero(dof, dof);
  MatrixXd Jv(3, dof), Jw(3, dof);
  for (const auto& link : finger.links) {
    const LinkFrame lf = link_frame(link);
    const Vec3 c = fk.body[link.body](lf.center0);
    Jv.setZero();
    Jw.setZero();
    for (int k = 0; k < link.body; ++k) {
      Jv.col(k) = fk.joint_axis[k].cross(c - fk.joint_pos[k]);
      Jw.col(k) = fk.joint_axis[k];
    }
    const Mat3 Rw = fk.body[link.body].R * lf.axes0;
    const Mat3 Iw = Rw * lf.principal.asDiagonal() * Rw.transpose();
    M.noalias() += link.mass * Jv.transpose() * Jv + Jw.transpose() * Iw * Jw;
  }
  return M;
}

MatrixXd finger_coriolis(const FingerModel& finger, const VectorXd& qi, const VectorXd& qidot) {
  const int dof = finger.dof();
  const double h = 1e-6;
  std::vector<MatrixXd> dM(dof);
  VectorXd qp = qi;
  for (int k = 0; k < dof; ++k) {
    qp[k] = qi[k] + h;
    const MatrixXd Mp = finger_inertia(finger, qp);
    qp[k] = qi[k] - h;
    const MatrixXd Mm = finger_inertia(finger, qp);
    qp[k] = qi[k];
    dM[k] = (Mp - Mm) / (2.0 * h);
  }
  MatrixXd C = MatrixXd::Zero(dof, dof);
  for (int i = 0; i < dof; ++i) {
    for (int j = 0; j < dof; ++j) {
      double cij = 0.0;
      for (int k = 0; k < dof; ++k) {
        cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qidot[k];
      }
      C(i, j) = cij;
    }
  }
  return C;
}

}  // namespace

MatrixXd hand_inertia(const HandModel& hand, const VectorXd& q) {
  const int m = hand.joint_count();
  MatrixXd M = MatrixXd::Zero(m, m);
  for (int i = 0; i < hand.contact_count(); ++i) {
    const int off = hand.joint_offset(i);
    const int dof = hand.fingers[i].dof();
    M.block(off, off, dof, dof) = finger_inertia(hand.fingers[i], hand.finger_q(i, q));
  }
  return M;
}

MatrixXd hand_coriolis(const HandModel& hand, const VectorXd& q, const VectorXd& qdot) {
  const int m = hand.joint_count();
  MatrixXd C = MatrixXd::Zero(m, m);
  for (int i = 0; i < hand.contact_count(); ++i) {
    const int off = hand.joint_offset(i);
    const int dof = hand.fingers[i].dof();
    C.block(off, off, dof, dof) =
        finger_coriolis(hand.fingers[i], hand.finger_q(i, q), qdot.segment(off, dof));
  }
  return C;
}

std::pair<Mat6, Mat6> object_terms(const ObjectModel& obj, const geometry::Pose& pose,
                                   const Vec6& xdot_o) {
  const Mat3 Iw = pose.rotation * obj.inertia_body * pose.rotation.transpose();
  Mat6 M = Mat6::Zero();
  M.block<3, 3>(0, 0) = obj.mass * Mat3::Identity();
  M.block<3, 3>(3, 3) = Iw;
  Mat6 C = Mat6::Zero();
  C.block<3, 3>(3, 3) = skew(xdot_o.tail<3>()) * Iw;
  return {M, C};
}

VectorXd hand_gravity_torque(const HandModel& hand, const VectorXd& q, const Vec3& gravity) {
  const int m = hand.joint_count();
  VectorXd tau = VectorXd::Zero(m);
  for (int i = 0; i < hand.contact_count(); ++i) {
    const FingerModel& f = hand.fingers[i];
    const int off = hand.joint_offset(i);
    const FingerKinematics fk = kinematics::finger_fk(f, hand.finger_q(i, q));
    for (const auto& link : f.links) {
      const Vec3 c0 = 0.5 * (link.start + link.end);
      const Vec3 c = fk.body[link.body](c0);
      for (int k = 0; k < link.body; ++k) {
        const Vec3 jcol = fk.joint_axis[k].cross(c - fk.joint_pos[k]);
        tau[off + k] += link.mass * jcol.dot(gravity);
      }
    }
  }
  return tau;
}

double hand_potential_energy(const HandModel& hand, const VectorXd& q, const Vec3& gravity) {
  double U = 0.0;
  for (int i = 0; i < hand.contact_count(); ++i) {
    const FingerModel& f = hand.fingers[i];
    const FingerKinematics fk = kinematics::finger_fk(f, hand.finger_q(i, q));
    for (const auto& link : f.links) {
      const Vec3 c = fk.body[link.body](0.5 * (link.start + link.end));
      U -= link.mass * gravity.dot(c);
    }
  }
  return U;
}

DynamicsTerms assemble_coupled(const HandModel& hand, const ObjectModel& obj,
                               const geometry::Pose& pose, const VectorXd& q,
                               const Vec6& xdot_o, const GraspKinematics& gk,
                               double fd_step) {
  DynamicsTerms terms;
  Eigen::PartialPivLU<MatrixXd> lu(gk.J_h);
  terms.B = lu.solve(gk.G.transpose());
  const VectorXd qdot = terms.B * xdot_o;

  terms.M_h = hand_inertia(hand, q);
  terms.C_h = hand_coriolis(hand, q, qdot);
  std::tie(terms.M_o, terms.C_o) = object_terms(obj, pose, xdot_o);

  // d/dt[J_h^{-1} G^T] along the current motion, contacts reprojected.
  const double h = fd_step;
  auto probe = [&](double sign) {
    const VectorXd qp = q + sign * h * qdot;
    geometry::Pose pp;
    pp.position = pose.position + sign * h * xdot_o.head<3>();
    pp.rotation = rotation_exp(sign * h * xdot_o.tail<3>()) * pose.rotation;
    // generous gap tolerance: probes may sit slightly off the surface
    const GraspKinematics g2 = eval_grasp(hand, obj.shape, pp, qp, 1e-2);
    return g2.constraint_map();
  };
  if (qdot.norm() + xdot_o.norm() > 0.0) {
    terms.ddt_B = (probe(1.0) - probe(-1.0)) / (2.0 * h);
  } else {
    terms.ddt_B = MatrixXd::Zero(terms.B.rows(), terms.B.cols());
  }

  terms.M_ho = terms.M_o + terms.B.transpose() * terms.M_h * terms.B;
  terms.C_ho = terms.C_o +
               terms.B.transpose() * (terms.C_h * terms.B + terms.M_h * terms.ddt_B);
  return terms;
}

ForwardDynamics forward_dynamics(const HandModel& hand, const ObjectModel& obj,
                                 const geometry::Pose& pose, const VectorXd& q,
                                 const Vec6& xdot_o, const VectorXd& u,
                                 const DisturbanceModel& dist, double t,
                                 double gap_tolerance) {
  const GraspKinematics gk = eval_grasp(hand, obj.shape, pose, q, gap_tolerance);
  ForwardDynamics out;
  out.terms = assemble_coupled(hand, obj, pose, q, xdot_o, gk);
  out.qdot = out.terms.B * xdot_o;

  const VectorXd tau_e = dist.joint_torque(hand, q, out.qdot);
  const Vec6 w_e = dist.external_wrench(t, obj.mass);
  const Vec6 rhs = out.terms.B.transpose() * (u + tau_e) + w_e - out.terms.C_ho * xdot_o;
  out.xddot_o = out.terms.M_ho.ldlt().solve(rhs);
  out.qddot = out.terms.ddt_B * xdot_o + out.terms.B * out.xddot_o;

  const VectorXd tau_c = u + tau_e - out.terms.M_h * out.qddot - out.terms.C_h * out.qdot;
  out.f_c = Eigen::PartialPivLU<MatrixXd>(gk.J_h.transpose()).solve(tau_c);
  return out;
}

VectorXd contact_normal_forces(const GraspKinematics& gk, const VectorXd& f_c) {
  const int n = static_cast<int>(gk.contacts.size());
  VectorXd fn(n);
  for (int i = 0; i < n; ++i) {
    fn[i] = -f_c.segment<3>(3 * i).dot(gk.contacts[i].normal);
  }
  return fn;
}

namespace {

struct StageDeriv {
  Vec3 pdot, phidot;
  Vec6 xddot;
  VectorXd qdot;
};

}  // namespace

HandObjectState step(const HandModel& hand, const ObjectModel& obj,
                     const HandObjectState& state, const VectorXd& u,
                     const DisturbanceModel& dist, const StepOptions& opts) {
  const double dt = opts.dt;
  const Mat3 R0 = state.object_pose.rotation;

  auto deriv = [&](const Vec3& p, const Vec3& phi, const Vec6& xdot, const VectorXd& q,
                   double t) {
    geometry::Pose pose;
    pose.position = p;
    pose.rotation = rotation_exp(phi) * R0;
    const GraspKinematics gk = eval_grasp(hand, obj.shape, pose, q, opts.gap_tolerance);
    Eigen::PartialPivLU<MatrixXd> lu(gk.J_h);
    const MatrixXd B = lu.solve(gk.G.transpose());
    const VectorXd qdot = B * xdot;

    DynamicsTerms terms = assemble_coupled(hand, obj, pose, q, xdot, gk, opts.fd_step);
    const VectorXd tau_e = dist.joint_torque(hand, q, qdot);
    const Vec6 w_e = dist.external_wrench(t, obj.mass);
    const Vec6 rhs = terms.B.transpose() * (u + tau_e) + w_e - terms.C_ho * xdot;

    StageDeriv d;
    d.pdot = xdot.head<3>();
    d.phidot = so3_left_jacobian_inverse(phi) * xdot.tail<3>();
    d.xddot = terms.M_ho.ldlt().solve(rhs);
    d.qdot = qdot;
    return d;
  };

  const Vec3 p0 = state.object_pose.position;
  const Vec3 phi0 = Vec3::Zero();
  const Vec6 xd0 = state.xdot_o;
  const VectorXd q0 = state.q;
  const double t0 = state.t;

  const StageDeriv k1 = deriv(p0, phi0, xd0, q0, t0);
  const StageDeriv k2 = deriv(p0 + 0.5 * dt * k1.pdot, phi0 + 0.5 * dt * k1.phidot,
                              xd0 + 0.5 * dt * k1.xddot, q0 + 0.5 * dt * k1.qdot,
                              t0 + 0.5 * dt);
  const StageDeriv k3 = deriv(p0 + 0.5 * dt * k2.pdot, phi0 + 0.5 * dt * k2.phidot,
                              xd0 + 0.5 * dt * k2.xddot, q0 + 0.5 * dt * k2.qdot,
                              t0 + 0.5 * dt);
  const StageDeriv k4 = deriv(p0 + dt * k3.pdot, phi0 + dt * k3.phidot,
                              xd0 + dt * k3.xddot, q0 + dt * k3.qdot, t0 + dt);

  HandObjectState next;
  next.t = t0 + dt;
  next.object_pose.position =
      p0 + dt / 6.0 * (k1.pdot + 2.0 * k2.pdot + 2.0 * k3.pdot + k4.pdot);
  const Vec3 phi = dt / 6.0 * (k1.phidot + 2.0 * k2.phidot + 2.0 * k3.phidot + k4.phidot);
  next.object_pose.rotation = orthonormalize(rotation_exp(phi) * R0);
  next.xdot_o = xd0 + dt / 6.0 * (k1.xddot + 2.0 * k2.xddot + 2.0 * k3.xddot + k4.xddot);
  next.q = q0 + dt / 6.0 * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot);

  GraspKinematics gk;
  try {
    gk = eval_grasp(hand, obj.shape, next.object_pose, next.q, opts.gap_tolerance);
  } catch (GraspError& e) {
    e.time = next.t;
    throw;
  }
  next.qdot = gk.qdot_from(next.xdot_o);
  next.contacts = gk.contacts;

  if (opts.grasp_checks) {
    const ForwardDynamics fd = forward_dynamics(hand, obj, next.object_pose, next.q,
                                                next.xdot_o, u, dist, next.t,
                                                opts.gap_tolerance);
    const VectorXd fn = contact_normal_forces(gk, fd.f_c);
    for (int i = 0; i < hand.contact_count(); ++i) {
      if (fn[i] <= 0.0) {
        throw GraspFailure("normal force non-positive at contact " + std::to_string(i),
                           next.t, i);
      }
      const Vec3 pole0 = hand.fingers[i].p_ft_offset0;
      if (pole0.norm() > 0.0) {
        const Vec3 pole = gk.fk[i].tip_body().R * pole0.normalized();
        if (gk.contacts[i].p_fc.dot(pole) < 0.0) {
          throw GraspFailure("contact rolled off the fingertip at contact " + std::to_string(i),
                             next.t, i);
        }
      }
      if (geometry::near_edge(obj.shape, next.object_pose, gk.contacts[i].p_c)) {
        throw EdgeContact(next.t, i);
      }
    }
  }
  return next;
}

double total_energy(const HandModel& hand, const ObjectModel& obj,
                    const HandObjectState& state, const DisturbanceModel& dist) {
  const MatrixXd M_h = hand_inertia(hand, state.q);
  const auto [M_o, C_o] = object_terms(obj, state.object_pose, state.xdot_o);
  double E = 0.5 * state.qdot.dot(M_h * state.qdot) +
             0.5 * state.xdot_o.dot(M_o * state.xdot_o);
  E -= obj.mass * dist.gravity.dot(state.object_pose.position);
  if (dist.hand_gravity) E += hand_potential_energy(hand, state.q, dist.gravity);
  return E;
}

}  // namespace inhand::dynamics
