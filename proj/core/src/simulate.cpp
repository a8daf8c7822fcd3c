#include "inhand/simulate.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "inhand/errors.hpp"
#include "inhand/svg_plot.hpp"

namespace inhand::harness {

using control::ManipulationController;
using control::Observation;
using dynamics::HandObjectState;
using nlohmann::json;

namespace {

Observation make_observation(const HandObjectState& state, const dynamics::GraspKinematics& gk,
                             control::TaskFrameMode mode) {
  Observation obs;
  obs.q = state.q;
  obs.qdot = state.qdot;
  if (mode == control::TaskFrameMode::Tactile) {
    obs.has_contacts = true;
    for (const auto& c : gk.contacts) obs.contact_offsets.push_back(c.p_fc);
  }
  if (mode == control::TaskFrameMode::OraclePose) {
    obs.has_object_pose = true;
    obs.object_pose = state.object_pose;
    obs.object_twist = state.xdot_o;
  }
  return obs;
}

// Hand copy whose tracked points sit at the given world targets; keeps frame
// probes consistent with the controller's instantaneous approximation.
kinematics::HandModel hand_with_tracked_points(const kinematics::HandModel& hand,
                                               const VectorXd& q,
                                               const std::vector<Vec3>& p_t) {
  kinematics::HandModel h = hand;
  for (size_t i = 0; i < h.fingers.size(); ++i) {
    const auto fk = kinematics::finger_fk(h.fingers[i], h.finger_q(static_cast<int>(i), q));
    h.fingers[i].p_ft_offset0 = fk.tip_body().inverse(p_t[i]) - h.fingers[i].fingertip_center0;
  }
  return h;
}

struct DiagnosticsEngine {
  const ScenarioConfig& cfg;
  const kinematics::HandModel& sim_hand;
  std::mt19937_64 rng;

  explicit DiagnosticsEngine(const ScenarioConfig& c, const kinematics::HandModel& h)
      : cfg(c), sim_hand(h), rng(c.seed + 101) {}

  // Task-frame Jacobian of the controller's frame at a probe state.
  Mat6 j_a_at(const kinematics::HandModel& frame_hand, const geometry::Pose& pose,
              const VectorXd& q) const {
    const auto gk = dynamics::eval_grasp(sim_hand, cfg.object.shape, pose, q, 1e-2);
    if (cfg.controller.frame == control::TaskFrameMode::OraclePose) {
      return kinematics::p_matrix(pose.rotation).inverse();
    }
    const MatrixXd dxdq = kinematics::task_jacobian(frame_hand, q);
    return kinematics::j_a(dxdq, gk.J_h, gk.G);
  }

  void fill(LogRow& row, const HandObjectState& state, const control::ControlCommand& cmd,
            const dynamics::ForwardDynamics& fd, const dynamics::GraspKinematics& gk,
            bool has_frame) {
    const auto& terms = fd.terms;

    Eigen::JacobiSVD<Mat6> svd(terms.M_ho.inverse());
    row.m_inv_norm = svd.singularValues().maxCoeff();

    // skew-symmetry residual of Mdot_ho - 2 C_ho along the flow
    const double speed = state.qdot.norm() + state.xdot_o.norm();
    if (speed > 1e-9) {
      const double h = 1e-6;
      auto mho_at = [&](double sign) {
        geometry::Pose pp;
        pp.position = state.object_pose.position + sign * h * state.xdot_o.head<3>();
        pp.rotation = rotation_exp(sign * h * state.xdot_o.tail<3>()) * state.object_pose.rotation;
        const VectorXd qp = state.q + sign * h * state.qdot;
        const auto gkp = dynamics::eval_grasp(sim_hand, cfg.object.shape, pp, qp, 1e-2);
        const Vec6 xdp = state.xdot_o + sign * h * fd.xddot_o;
        return dynamics::assemble_coupled(sim_hand, cfg.object, pp, qp, xdp, gkp).M_ho;
      };
      const Mat6 Mdot = (mho_at(1.0) - mho_at(-1.0)) / (2.0 * h);
      const Mat6 skew_part = Mdot - 2.0 * terms.C_ho;
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vec6 v;
      for (int i = 0; i < 6; ++i) v[i] = gauss(rng);
      row.skew_residual = std::abs(v.dot(skew_part * v)) / (v.squaredNorm() * speed);
    }

    if (!has_frame) return;

    // controller frame with the tracked points frozen at this instant
    const auto frame_hand = hand_with_tracked_points(sim_hand, state.q, cmd.debug.p_t);
    const Mat6 J_a = j_a_at(frame_hand, state.object_pose, state.q);

    // d/dt of J_a and its inverse along the flow
    const double h = 1e-6;
    Mat6 Ja_p = J_a, Ja_m = J_a;
    const double speed2 = state.qdot.norm() + state.xdot_o.norm();
    if (speed2 > 1e-12) {
      auto probe = [&](double sign) {
        geometry::Pose pp;
        pp.position = state.object_pose.position + sign * h * state.xdot_o.head<3>();
        pp.rotation = rotation_exp(sign * h * state.xdot_o.tail<3>()) * state.object_pose.rotation;
        const VectorXd qp = state.q + sign * h * state.qdot;
        return j_a_at(frame_hand, pp, qp);
      };
      Ja_p = probe(1.0);
      Ja_m = probe(-1.0);
    }
    const Mat6 ddt_Ja = (Ja_p - Ja_m) / (2.0 * h);
    const Mat6 ddt_Ja_inv = (Ja_p.inverse() - Ja_m.inverse()) / (2.0 * h);

    const Mat6 M_a = analysis::task_inertia(J_a, terms.M_ho);
    const Mat6 C_a = analysis::task_coriolis(J_a, terms.M_ho, terms.C_ho, ddt_Ja_inv);

    analysis::FrameJacobians jac;
    jac.J_h = gk.J_h;
    jac.G = gk.G;
    jac.J_h_hat = cmd.debug.J_h_hat;
    jac.G_hat = cmd.debug.G_hat;
    jac.P = cmd.debug.P;
    jac.J_a = J_a;

    const VectorXd tau_e = cfg.disturbances.joint_torque(sim_hand, state.q, state.qdot);
    const Vec6 w_e = cfg.disturbances.external_wrench(state.t, cfg.object.mass);
    const auto dist = analysis::compute_psi_eta(jac, M_a, C_a, cmd.e_dot, tau_e, w_e, cmd.u_m,
                                                cmd.u_f, cfg.controller.gains.M_bar);

    row.has_diagnostics = true;
    row.psi = dist.psi;
    row.eta = dist.eta;
    row.contraction = analysis::contraction_norm(M_a, cfg.controller.gains.M_bar);
    Eigen::SelfAdjointEigenSolver<Mat6> es(M_a);
    row.lambda_min_Ma = es.eigenvalues().minCoeff();

    // decomposition identity: M_a eddot = u_m + psi (psi carries the -C_a edot)
    const Vec6 eddot = ddt_Ja * state.xdot_o + J_a * fd.xddot_o;
    const Vec6 residual = M_a * eddot - cmd.u_m - dist.psi;
    row.decomposition_residual = residual.norm() / std::max(cmd.u_m.norm(), 1e-9);
  }
};

}  // namespace

json VerificationReport::to_json() const {
  json j;
  j["invariants_ok"] = invariants_ok;
  j["tainted"] = tainted;
  j["violations"] = violations;
  j["stats"] = {{"max_constraint_residual", stats.max_constraint_residual},
                {"max_gap", stats.max_gap},
                {"min_normal_force", stats.min_normal_force},
                {"max_contraction", stats.max_contraction},
                {"m_min", stats.m_min},
                {"m_max", stats.m_max},
                {"min_lambda_Ma", stats.min_lambda_Ma},
                {"max_decomposition_residual", stats.max_decomposition_residual},
                {"max_skew_residual", stats.max_skew_residual}};
  json settle = json::array(), overshoot = json::array(), sse = json::array();
  for (int i = 0; i < 6; ++i) {
    settle.push_back(metrics.settling_time[i]);
    overshoot.push_back(metrics.overshoot[i]);
    sse.push_back(metrics.steady_state_error[i]);
  }
  j["metrics"] = {{"settling_time", settle},
                  {"overshoot", overshoot},
                  {"steady_state_error", sse},
                  {"exp_rate", metrics.exp_rate},
                  {"exp_fit_r2", metrics.exp_fit_r2}};
  j["lemma4"] = {{"applicable", lemma4.applicable},
                 {"pass", lemma4.pass},
                 {"residual", lemma4.residual},
                 {"detail", lemma4.detail}};
  if (terminal_event) {
    j["terminal_event"] = {{"kind", terminal_event->kind},
                           {"t", terminal_event->t},
                           {"finger", terminal_event->finger},
                           {"detail", terminal_event->detail}};
  }
  j["wall_seconds"] = wall_seconds;
  return j;
}

RunResult run_scenario(const ScenarioConfig& raw_cfg) {
  const auto t_start = std::chrono::steady_clock::now();

  InitialSetup setup = setup_initial_state(raw_cfg);
  const ScenarioConfig cfg = resolve_gains(raw_cfg, setup);

  RunResult result;
  result.resolved = cfg;
  result.log.m = cfg.hand.joint_count();
  result.log.n = cfg.hand.contact_count();

  ManipulationController controller(setup.hand, cfg.controller);
  DiagnosticsEngine diag(cfg, setup.hand);

  dynamics::StepOptions opts;
  opts.dt = cfg.dt;
  opts.gap_tolerance = cfg.gap_tolerance;
  opts.grasp_checks = cfg.grasp_checks;

  HandObjectState state = setup.state;
  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  const int m = cfg.hand.joint_count();

  auto log_state = [&](const HandObjectState& s, const control::ControlCommand& cmd,
                       const dynamics::ForwardDynamics& fd, const dynamics::GraspKinematics& gk) {
    LogRow row;
    row.t = s.t;
    row.p_o = s.object_pose.position;
    row.x = cmd.x;
    row.e = cmd.e;
    row.e_dot = cmd.e_dot;
    row.u_m = cmd.u_m;
    row.u = cmd.u;
    row.u_f = cmd.u_f;
    row.gap.resize(gk.contacts.size());
    for (size_t i = 0; i < gk.contacts.size(); ++i) row.gap[i] = gk.contacts[i].gap;
    row.normal_force = dynamics::contact_normal_forces(gk, fd.f_c);
    row.constraint_residual = (gk.J_h * s.qdot - gk.G.transpose() * s.xdot_o).norm();
    row.energy = dynamics::total_energy(setup.hand, cfg.object, s, cfg.disturbances);
    diag.fill(row, s, cmd, fd, gk, cfg.controller_enabled);
    result.log.rows.push_back(std::move(row));
  };

  try {
    for (int k = 0; k <= steps; ++k) {
      const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape, state.object_pose,
                                           state.q, cfg.gap_tolerance);
      state.qdot = gk.qdot_from(state.xdot_o);

      control::ControlCommand cmd;
      if (cfg.controller_enabled) {
        cmd = controller.update(make_observation(state, gk, cfg.controller.frame), state.t,
                                cfg.dt);
      } else {
        cmd.u = VectorXd::Zero(m);
        cmd.u_f = VectorXd::Zero(3 * cfg.hand.contact_count());
        cmd.u_e = VectorXd::Zero(m);
        cmd.dither = VectorXd::Zero(m);
      }

      if (k % cfg.log_stride == 0 || k == steps) {
        const auto fd = dynamics::forward_dynamics(setup.hand, cfg.object, state.object_pose,
                                                   state.q, state.xdot_o, cmd.u,
                                                   cfg.disturbances, state.t, cfg.gap_tolerance);
        log_state(state, cmd, fd, gk);
      }
      if (k == steps) break;
      state = dynamics::step(setup.hand, cfg.object, state, cmd.u, cfg.disturbances, opts);
    }
  } catch (const GraspError& e) {
    LogEvent ev;
    ev.kind = "grasp_failure";
    ev.t = e.time >= 0.0 ? e.time : state.t;
    ev.finger = e.finger;
    ev.detail = e.what();
    result.log.events.push_back(ev);
    result.report.terminal_event = ev;
    result.exit_code = 3;
  }

  // aggregate invariants over logged rows
  auto& st = result.report.stats;
  st.min_normal_force = std::numeric_limits<double>::infinity();
  st.m_min = std::numeric_limits<double>::infinity();
  st.min_lambda_Ma = std::numeric_limits<double>::infinity();
  bool any_diag = false;
  for (const auto& row : result.log.rows) {
    st.max_constraint_residual = std::max(st.max_constraint_residual, row.constraint_residual);
    if (row.gap.size() > 0) st.max_gap = std::max(st.max_gap, row.gap.cwiseAbs().maxCoeff());
    if (row.normal_force.size() > 0)
      st.min_normal_force = std::min(st.min_normal_force, row.normal_force.minCoeff());
    if (row.m_inv_norm > 0.0) {
      st.m_min = std::min(st.m_min, row.m_inv_norm);
      st.m_max = std::max(st.m_max, row.m_inv_norm);
    }
    st.max_skew_residual = std::max(st.max_skew_residual, row.skew_residual);
    if (row.has_diagnostics) {
      any_diag = true;
      st.max_contraction = std::max(st.max_contraction, row.contraction);
      st.min_lambda_Ma = std::min(st.min_lambda_Ma, row.lambda_min_Ma);
      st.max_decomposition_residual =
          std::max(st.max_decomposition_residual, row.decomposition_residual);
    }
  }

  auto& rep = result.report;
  if (st.max_constraint_residual > cfg.constraint_tolerance) {
    rep.violations.push_back("constraint residual " + std::to_string(st.max_constraint_residual));
  }
  if (st.max_gap > cfg.invariant_gap) {
    rep.violations.push_back("contact gap " + std::to_string(st.max_gap));
  }
  if (any_diag) {
    if (st.max_contraction >= 1.0) {
      rep.violations.push_back("contraction bound " + std::to_string(st.max_contraction));
    }
    if (st.min_lambda_Ma <= 0.0) {
      rep.violations.push_back("task inertia lost positive definiteness");
    }
  }
  rep.invariants_ok = rep.violations.empty();
  rep.tainted = !rep.invariants_ok;

  if (cfg.controller_enabled && !result.log.rows.empty()) {
    rep.metrics = analysis::performance_metrics(result.log.times(), result.log.errors(),
                                                result.log.error_rates(),
                                                cfg.controller.reference.tolerance);
    const auto& last = result.log.rows.back();
    const double psi_max = [&] {
      double v = 0.0;
      for (const auto& r : result.log.rows) v = std::max(v, r.psi.norm());
      return v;
    }();
    rep.lemma4 = analysis::lemma4_check(result.log.times(), result.log.psis(), last.e.norm(),
                                        last.e_dot.norm(), 1e-4 * std::max(psi_max, 1e-12),
                                        cfg.disturbances.time_varying());
  }

  if (result.exit_code == 0 && !rep.invariants_ok) result.exit_code = 4;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

void write_outputs(const RunResult& result, const std::string& out_dir, bool plots) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  result.log.write_csv_file(out_dir + "/log.csv");
  {
    std::ofstream out(out_dir + "/config.resolved.json");
    out << resolved_json(result.resolved).dump(2) << "\n";
  }
  {
    std::ofstream out(out_dir + "/report.json");
    out << result.report.to_json().dump(2) << "\n";
  }
  if (plots) {
    emit_plots(result.log, out_dir);
  }
}

}  // namespace inhand::harness
