#include "inhand/verify.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "inhand/analysis.hpp"
#include "inhand/errors.hpp"
#include "inhand/simulate.hpp"

namespace inhand::harness {

using nlohmann::json;

namespace {

struct Checker {
  SuiteResult& res;
  void check(bool ok, const std::string& what, const std::string& detail = "") {
    std::ostringstream line;
    line << (ok ? "pass" : "FAIL") << "  " << what;
    if (!detail.empty()) line << "  [" << detail << "]";
    res.lines.push_back(line.str());
    if (!ok) {
      res.pass = false;
      if (!detail.empty()) res.counterexamples.push_back(what + ": " + detail);
    }
  }
};

ScenarioConfig demo_config(const std::string& name) {
  json j = demo_scenario_json(name);
  j["hand"] = demo_hand_json();
  return load_scenario(j, "");
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-6) v = Vec3(g(rng), g(rng), g(rng));
  return v.normalized();
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"kinematics", "conservation", "lemmas", "dual_form", "qp", "all"};
}

ScenarioConfig conservation_scenario(double gravity_z, double horizon) {
  ScenarioConfig cfg = demo_config("proposed_m005");
  cfg.name = "conservation";
  cfg.controller_enabled = false;
  cfg.disturbances.joint_viscous = 0.0;
  cfg.disturbances.gravity = Vec3(0.0, 0.0, gravity_z);
  cfg.grasp_checks = false;  // bilateral contacts; no servo keeps them loaded
  cfg.horizon = horizon;
  cfg.dt = 1e-4;
  cfg.log_stride = 10;
  return cfg;
}

ScenarioConfig converged_scenario() {
  ScenarioConfig cfg = demo_config("proposed_m005");
  cfg.name = "converged";
  const auto& g = cfg.controller.gains;
  cfg.controller.gains = control::GainConfig::from_epsilon(
      g.M_bar, 4.0 * Mat6::Identity(), 4.0 * Mat6::Identity(), g.epsilon, g.k_f);
  return cfg;
}

std::vector<SampledGrasp> sample_grasps(int count, std::uint64_t seed) {
  const ScenarioConfig cfg = demo_config("proposed_m010");
  const InitialSetup setup = setup_initial_state(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<SampledGrasp> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 20 * count) {
    ++attempts;
    Vec6 dir;
    for (int i = 0; i < 6; ++i) dir[i] = gauss(rng);
    dir.head<3>() = dir.head<3>().normalized() * 0.012;
    dir.tail<3>() = dir.tail<3>().normalized() * 0.05;
    VectorXd q = setup.state.q;
    geometry::Pose pose = setup.state.object_pose;
    bool ok = true;
    const int substeps = 10;
    try {
      for (int k = 0; k < substeps; ++k) {
        const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape, pose, q, 1e-2);
        q += gk.qdot_from(dir) / substeps;
        pose.position += dir.head<3>() / substeps;
        pose.rotation = rotation_exp(dir.tail<3>() / substeps) * pose.rotation;
      }
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) continue;

    SampledGrasp sg;
    sg.object = cfg.object;
    try {
      const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape, pose, q, 1e-2);
      sg.hand = setup.hand;
      for (int i = 0; i < sg.hand.contact_count(); ++i) {
        sg.hand.fingers[i].p_ft_offset0 =
            gk.fk[i].tip_body().inverse(gk.contacts[i].p_c) -
            sg.hand.fingers[i].fingertip_center0;
      }
      sg.state.q = q;
      sg.state.object_pose = pose;
      sg.state.contacts = gk.contacts;
      Vec6 xdot;
      for (int i = 0; i < 6; ++i) xdot[i] = gauss(rng);
      sg.state.xdot_o = 0.05 * xdot;
      sg.state.qdot = gk.qdot_from(sg.state.xdot_o);
      sg.state.t = 0.0;
      // keep only healthy frames
      kinematics::s_matrix(
          kinematics::virtual_frame(kinematics::tracked_points(sg.hand, q)).R_pa);
      kinematics::j_a(kinematics::task_jacobian(sg.hand, q), gk.J_h, gk.G);
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(sg));
  }
  return out;
}

namespace {

SuiteResult run_kinematics_suite(std::uint64_t seed) {
  SuiteResult res;
  res.suite = "kinematics";
  res.pass = true;
  Checker c{res};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto grasps = sample_grasps(40, seed + 7);
  c.check(grasps.size() >= 30, "sampled valid grasps",
          std::to_string(grasps.size()) + " of 40");

  // grasp constraint identity
  double worst = 0.0;
  for (const auto& sg : grasps) {
    const auto gk = dynamics::eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose,
                                         sg.state.q, 1e-2);
    Vec6 xdot;
    for (int i = 0; i < 6; ++i) xdot[i] = gauss(rng);
    const VectorXd qdot = gk.qdot_from(xdot);
    worst = std::max(worst, (gk.J_h * qdot - gk.G.transpose() * xdot).norm());
  }
  c.check(worst <= 1e-12, "rolling constraint identity", "max residual " + std::to_string(worst));

  // virtual frame equivariance under rigid rotation
  double worst_eq = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(random_unit(rng) * (0.05 + 0.05 * trial / 50.0));
    kinematics::TaskFrame tf;
    try {
      tf = kinematics::virtual_frame(pts);
    } catch (const DegenerateFrame&) {
      continue;
    }
    const Mat3 Q = rotation_exp(random_unit(rng) * 1.1);
    std::vector<Vec3> rotated;
    for (const auto& p : pts) rotated.push_back(Q * p);
    const auto tf2 = kinematics::virtual_frame(rotated);
    worst_eq = std::max(worst_eq, (tf2.p_a - Q * tf.p_a).norm());
    worst_eq = std::max(worst_eq, (tf2.R_pa - Q * tf.R_pa).norm());
  }
  c.check(worst_eq <= 1e-12, "virtual frame equivariance", "max deviation " + std::to_string(worst_eq));

  // approximate maps depend on q only
  {
    const auto& sg = grasps.front();
    const VectorXd q = sg.state.q;
    const auto pts = kinematics::tracked_points(sg.hand, q);
    const auto tf = kinematics::virtual_frame(pts);
    const MatrixXd Ghat1 = kinematics::approx_grasp_map(pts, tf.p_a);
    const MatrixXd dxdq1 = kinematics::task_jacobian(sg.hand, q);
    // object pose is not an input to either map; identical by construction
    c.check((Ghat1 - kinematics::approx_grasp_map(pts, tf.p_a)).norm() == 0.0 &&
                (dxdq1 - kinematics::task_jacobian(sg.hand, q)).norm() == 0.0,
            "approximate maps are functions of q alone");
  }

  // rank of the grasp map on non-collinear contacts
  double min_sv = 1e9;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> p_oc{random_unit(rng) * 0.04, random_unit(rng) * 0.04,
                           random_unit(rng) * 0.04};
    const Vec3 cr = (p_oc[2] - p_oc[0]).cross(p_oc[1] - p_oc[0]);
    if (cr.norm() < 1e-3) continue;
    Eigen::JacobiSVD<MatrixXd> svd(kinematics::grasp_map(p_oc));
    min_sv = std::min(min_sv, svd.singularValues().minCoeff());
  }
  c.check(min_sv > 1e-10, "grasp map full rank on non-collinear contacts",
          "min sigma " + std::to_string(min_sv));

  // spatial Jacobian vs central differences
  {
    const auto& finger = grasps.front().hand.fingers[0];
    double worst_fd = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd q(finger.dof());
      for (int i = 0; i < finger.dof(); ++i) q[i] = 0.6 * gauss(rng);
      const auto Js = kinematics::spatial_jacobian(finger, q);
      const double h = 1e-6;
      for (int k = 0; k < finger.dof(); ++k) {
        VectorXd qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const Vec3 dv = (kinematics::finger_fk(finger, qp).tip_center -
                         kinematics::finger_fk(finger, qm).tip_center) /
                        (2.0 * h);
        worst_fd = std::max(worst_fd, (dv - Vec3(Js.col(k).head<3>())).norm());
      }
    }
    c.check(worst_fd <= 1e-6, "spatial Jacobian vs finite differences",
            "max deviation " + std::to_string(worst_fd));
  }

  // S matrix against a finite-difference angular velocity oracle
  {
    double worst_s = 0.0;
    const auto& sg = grasps.front();
    const auto gk0 = dynamics::eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose,
                                          sg.state.q, 1e-2);
    for (int trial = 0; trial < 10; ++trial) {
      Vec6 xdot;
      for (int i = 0; i < 6; ++i) xdot[i] = gauss(rng);
      const VectorXd qdot = gk0.qdot_from(xdot);
      const double h = 1e-6;
      auto frame_at = [&](double sign) {
        return kinematics::virtual_frame(
            kinematics::tracked_points(sg.hand, sg.state.q + sign * h * qdot));
      };
      const auto fp = frame_at(1.0);
      const auto fm = frame_at(-1.0);
      const auto f0 = kinematics::virtual_frame(
          kinematics::tracked_points(sg.hand, sg.state.q));
      const Mat3 Rdot = (fp.R_pa - fm.R_pa) / (2.0 * h);
      const Vec3 omega = unskew(Rdot * f0.R_pa.transpose());
      Vec3 gdot = (kinematics::unwrap_gamma(fp.gamma_a, f0.gamma_a) -
                   kinematics::unwrap_gamma(fm.gamma_a, f0.gamma_a)) /
                  (2.0 * h);
      const Mat3 S = kinematics::s_matrix(f0.R_pa);
      worst_s = std::max(worst_s, (S * gdot - omega).norm() / std::max(1.0, omega.norm()));
    }
    c.check(worst_s <= 1e-6, "S matrix vs angular velocity oracle",
            "max relative deviation " + std::to_string(worst_s));
  }

  // task Jacobian vs finite differences of the frame state
  {
    double worst_tj = 0.0;
    for (size_t gi = 0; gi < std::min<size_t>(5, grasps.size()); ++gi) {
      const auto& sg = grasps[gi];
      const MatrixXd dxdq = kinematics::task_jacobian(sg.hand, sg.state.q);
      const VectorXd qdot = sg.state.qdot;
      const double h = 1e-5;
      auto x_at = [&](double sign) {
        const auto pts = kinematics::tracked_points(sg.hand, sg.state.q + sign * h * qdot);
        const auto tf = kinematics::virtual_frame(pts);
        Vec6 x;
        x << tf.p_a, tf.gamma_a;
        return x;
      };
      const Vec6 xp = x_at(1.0), xm = x_at(-1.0);
      Vec6 dx = (xp - xm) / (2.0 * h);
      const Vec6 pred = dxdq * qdot;
      worst_tj = std::max(worst_tj, (dx - pred).norm() / std::max(1.0, pred.norm()));
    }
    c.check(worst_tj <= 1e-5, "task Jacobian vs finite differences",
            "max relative deviation " + std::to_string(worst_tj));
  }

  // J_a invertibility across sampled grasps
  {
    double min_det = 1e9;
    for (const auto& sg : grasps) {
      const auto gk = dynamics::eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose,
                                           sg.state.q, 1e-2);
      const Mat6 Ja =
          kinematics::j_a(kinematics::task_jacobian(sg.hand, sg.state.q), gk.J_h, gk.G);
      min_det = std::min(min_det, std::abs(Ja.determinant()));
    }
    c.check(min_det > 1e-12, "task map invertible over sampled grasps",
            "min |det J_a| " + std::to_string(min_det));
  }

  return res;
}

SuiteResult run_conservation_suite(std::uint64_t seed) {
  SuiteResult res;
  res.suite = "conservation";
  res.pass = true;
  Checker c{res};
  (void)seed;

  const ScenarioConfig cfg = conservation_scenario();
  const RunResult r = run_scenario(cfg);
  c.check(r.exit_code == 0, "torque-free run completes", "exit " + std::to_string(r.exit_code));
  if (r.log.rows.empty()) return res;

  const double E0 = r.log.rows.front().energy;
  const Vec3 p0 = r.log.rows.front().p_o;
  double max_drift = 0.0;
  double scale = 0.0;  // energy exchanged between kinetic and potential form
  for (const auto& row : r.log.rows) {
    max_drift = std::max(max_drift, std::abs(row.energy - E0));
    scale = std::max(scale,
                     std::abs(cfg.object.mass * cfg.disturbances.gravity.dot(row.p_o - p0)));
  }
  c.check(scale > 1e-6, "run exchanges a measurable amount of energy",
          "scale " + std::to_string(scale) + " J");
  const double rel_drift = max_drift / std::max(scale, 1e-12);
  c.check(rel_drift <= 1e-6, "relative energy drift <= 1e-6",
          "drift " + std::to_string(rel_drift));

  c.check(r.report.stats.max_skew_residual <= 1e-5, "Mdot - 2C skew residual <= 1e-5",
          "max " + std::to_string(r.report.stats.max_skew_residual));
  c.check(r.report.stats.max_constraint_residual <= 1e-6, "constraint residual <= 1e-6",
          std::to_string(r.report.stats.max_constraint_residual));
  c.check(r.report.stats.max_gap <= 1e-5, "gap drift <= 1e-5 m",
          std::to_string(r.report.stats.max_gap));
  return res;
}

SuiteResult run_lemmas_suite(std::uint64_t seed) {
  SuiteResult res;
  res.suite = "lemmas";
  res.pass = true;
  Checker c{res};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Lemma 2: zero task velocity implies a resting hand-object pair
  {
    const auto grasps = sample_grasps(100, seed + 3);
    int passed = 0, applicable = 0;
    for (const auto& sg : grasps) {
      const auto gk = dynamics::eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose,
                                           sg.state.q, 1e-2);
      const MatrixXd dxdq = kinematics::task_jacobian(sg.hand, sg.state.q);
      const auto rep = analysis::lemma2_check(dxdq, gk.J_h, gk.G, Vec6::Zero());
      if (rep.applicable) {
        ++applicable;
        if (rep.pass) ++passed;
      }
    }
    c.check(applicable >= 90 && passed == applicable, "resting task frame implies resting system",
            std::to_string(passed) + "/" + std::to_string(applicable));

    // injected rank deficiency reports inapplicable
    const auto& sg = grasps.front();
    const auto gk = dynamics::eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose,
                                         sg.state.q, 1e-2);
    MatrixXd bad = kinematics::task_jacobian(sg.hand, sg.state.q);
    bad.row(5).setZero();
    const auto rep = analysis::lemma2_check(bad, gk.J_h, gk.G, Vec6::Zero());
    c.check(!rep.applicable, "rank-deficient frame Jacobian reports inapplicable");
  }

  // Lemma 5: centroid internal force stays in the kernel of the true map
  {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Vec3> p_c;
      const int n = 3 + (trial % 2);
      for (int i = 0; i < n; ++i) p_c.push_back(random_unit(rng) * (0.03 + 0.02 * (i + 1)));
      const Vec3 cr = (p_c[2] - p_c[0]).cross(p_c[1] - p_c[0]);
      if (cr.norm() < 1e-4) continue;
      Vec3 p_a = Vec3::Zero();
      for (const auto& p : p_c) p_a += p;
      p_a /= double(n);
      const Vec3 p_o = p_a + 0.3 * random_unit(rng) * 0.05;
      std::vector<Vec3> p_oc;
      for (const auto& p : p_c) p_oc.push_back(p - p_o);
      const MatrixXd G = kinematics::grasp_map(p_oc);
      const MatrixXd G_hat = kinematics::approx_grasp_map(p_c, p_a);
      const VectorXd u_f = control::centroid_internal_force(p_c, p_a, 80.0);
      const auto rep = gfo::kernel_check(G, G_hat, u_f);
      if (u_f.norm() > 0.0) {
        worst = std::max(worst, rep.G_residual / u_f.norm());
      }
    }
    c.check(worst <= 1e-10, "kernel internal force stays in Ker(G) (tactile points)",
            "max ||G u_f||/||u_f|| " + std::to_string(worst));
  }

  // Lemma 4: converged run has a stationary cumulative disturbance
  {
    const RunResult r = run_scenario(converged_scenario());
    c.check(r.exit_code == 0, "converged run completes", "exit " + std::to_string(r.exit_code));
    c.check(r.report.lemma4.applicable && r.report.lemma4.pass,
            "psi rate vanishes at the converged equilibrium",
            r.report.lemma4.applicable ? "residual " + std::to_string(r.report.lemma4.residual)
                                       : r.report.lemma4.detail);

    // a time-varying wrench reports expected-nonzero instead of failing
    ScenarioConfig tv = converged_scenario();
    tv.disturbances.wrench_amplitude << 0.0, 0.0, 0.05, 0.0, 0.0, 0.0;
    tv.disturbances.wrench_frequency = 2.0;
    tv.horizon = 1.0;
    const RunResult r2 = run_scenario(tv);
    c.check(!r2.report.lemma4.applicable, "time-varying wrench marks the check inapplicable",
            r2.report.lemma4.detail);
  }
  return res;
}

SuiteResult run_dual_form_suite(std::uint64_t seed) {
  SuiteResult res;
  res.suite = "dual_form";
  res.pass = true;
  Checker c{res};
  (void)seed;

  ScenarioConfig cfg = demo_config("proposed_m005");
  const InitialSetup setup = setup_initial_state(cfg);
  cfg = resolve_gains(cfg, setup);
  const auto& gains = cfg.controller.gains;

  control::ManipulationController pid(setup.hand, cfg.controller);
  analysis::EstimatorState est;
  est.epsilon = gains.epsilon;

  dynamics::StepOptions opts;
  opts.dt = cfg.dt;
  opts.gap_tolerance = cfg.gap_tolerance;
  opts.grasp_checks = cfg.grasp_checks;

  dynamics::HandObjectState state = setup.state;
  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  double max_rel = 0.0;
  bool matched_init_applied = false;

  for (int k = 0; k <= steps; ++k) {
    const auto gk = dynamics::eval_grasp(cfg.hand, cfg.object.shape, state.object_pose,
                                         state.q, cfg.gap_tolerance);
    state.qdot = gk.qdot_from(state.xdot_o);
    control::Observation obs;
    obs.q = state.q;
    obs.qdot = state.qdot;
    if (!matched_init_applied) {
      // the first frame determines e(0), edot(0); pre-charge the integral so
      // both forms coincide from the start
      control::ManipulationController probe(setup.hand, cfg.controller);
      const auto cmd0 = probe.update(obs, state.t, cfg.dt);
      pid.set_initial_integral(
          analysis::matched_integral_state(gains.K1, gains.K2, cmd0.e, cmd0.e_dot));
      matched_init_applied = true;
    }
    const auto cmd = pid.update(obs, state.t, cfg.dt);
    const Vec6 u_est = analysis::estimator_controller(cmd.e, cmd.e_dot, est, gains.M_bar,
                                                      gains.K1, gains.K2, cfg.dt);
    const double rel = (u_est - cmd.u_m).norm() / std::max(cmd.u_m.norm(), 1.0);
    max_rel = std::max(max_rel, rel);
    if (k == steps) break;
    state = dynamics::step(cfg.hand, cfg.object, state, cmd.u, cfg.disturbances, opts);
  }
  c.check(max_rel <= 1e-6, "PID and estimator forms agree over a 10 s run",
          "max relative gap " + std::to_string(max_rel));
  return res;
}

SuiteResult run_qp_suite(std::uint64_t seed) {
  SuiteResult res;
  res.suite = "qp";
  res.pass = true;
  Checker c{res};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  int agree = 0, total = 0, infeasible_both = 0, status_mismatch = 0;
  double worst_obj_gap = 0.0;
  std::string worst_case;
  for (int trial = 0; trial < 200; ++trial) {
    // random 3-contact instance with 4-sided cones
    std::vector<Vec3> p_t;
    for (int i = 0; i < 3; ++i) p_t.push_back(random_unit(rng) * (0.03 + 0.03 * uni(rng)));
    const Vec3 cr = (p_t[2] - p_t[0]).cross(p_t[1] - p_t[0]);
    if (cr.norm() < 1e-4) continue;
    Vec3 p_a = (p_t[0] + p_t[1] + p_t[2]) / 3.0;
    const MatrixXd G_hat = kinematics::approx_grasp_map(p_t, p_a);
    Vec6 u_m;
    for (int i = 0; i < 6; ++i) u_m[i] = gauss(rng);
    u_m.head<3>() *= 2.0;
    u_m.tail<3>() *= 0.05;
    std::vector<gfo::FrictionCone> cones(3);
    std::vector<Vec3> inward(3);
    for (int i = 0; i < 3; ++i) {
      cones[i].mu = 0.3 + 0.7 * uni(rng);
      cones[i].sides = 4;
      inward[i] = (p_a - p_t[i]).normalized();
    }
    const double f_min = 0.5 * uni(rng);

    const auto sol = gfo::gfo_solve(G_hat, u_m, cones, inward, f_min);

    gfo::QPProblem prob;
    prob.A_eq = G_hat;
    prob.b_eq = u_m;
    int rows = 0;
    for (const auto& cone : cones) rows += cone.sides + 1;
    prob.A_in = MatrixXd::Zero(rows, 9);
    prob.b_in = VectorXd::Zero(rows);
    int r = 0;
    for (int i = 0; i < 3; ++i) {
      prob.A_in.block(r, 3 * i, cones[i].sides, 3) = gfo::linearize_cone(cones[i], inward[i]);
      r += cones[i].sides;
      prob.A_in.block(r, 3 * i, 1, 3) = -inward[i].normalized().transpose();
      prob.b_in[r] = -f_min;
      ++r;
    }
    const auto oracle = enumerate_qp_oracle(prob);

    ++total;
    if (sol.status == gfo::QPStatus::Optimal && oracle.status == gfo::QPStatus::Optimal) {
      const double gap = std::abs(sol.objective - oracle.objective) /
                         std::max(1.0, oracle.objective);
      if (gap > worst_obj_gap) {
        worst_obj_gap = gap;
        std::ostringstream os;
        os << "trial " << trial << " objective " << sol.objective << " vs oracle "
           << oracle.objective;
        worst_case = os.str();
      }
      if (gap <= 1e-6) ++agree;
    } else if (sol.status != gfo::QPStatus::Optimal &&
               oracle.status != gfo::QPStatus::Optimal) {
      ++infeasible_both;
      ++agree;
    } else {
      ++status_mismatch;
      if (worst_case.empty()) worst_case = "status mismatch at trial " + std::to_string(trial);
    }
  }
  c.check(total >= 150 && agree == total,
          "active-set solve matches enumeration oracle",
          std::to_string(agree) + "/" + std::to_string(total) + " (both infeasible " +
              std::to_string(infeasible_both) + ", mismatches " +
              std::to_string(status_mismatch) + ", worst gap " +
              std::to_string(worst_obj_gap) + (worst_case.empty() ? "" : "; " + worst_case) +
              ")");

  // inscribed cone containment
  {
    int inside = 0, checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      gfo::FrictionCone cone;
      cone.mu = 0.2 + 1.3 * uni(rng);
      cone.sides = 3 + static_cast<int>(uni(rng) * 9);
      const Vec3 n = random_unit(rng);
      const MatrixXd rows = gfo::linearize_cone(cone, n);
      Vec3 f = random_unit(rng) * (0.1 + 5.0 * uni(rng));
      if (f.dot(n) < 0.0) f = -f;
      if (((rows * f).array() <= 1e-12).all()) {
        ++checked;
        const double fn = f.dot(n);
        const double ft = (f - fn * n).norm();
        if (ft <= cone.mu * fn + 1e-12) ++inside;
      }
    }
    c.check(checked > 500 && inside == checked, "inscribed cone contained in friction cone",
            std::to_string(inside) + "/" + std::to_string(checked));
  }
  return res;
}

}  // namespace

gfo::QPSolution enumerate_qp_oracle(const gfo::QPProblem& prob) {
  const int dim = static_cast<int>(prob.A_eq.cols());
  const int n_in = static_cast<int>(prob.A_in.rows());
  const int max_active = dim - 6;

  gfo::QPSolution best;
  best.status = gfo::QPStatus::Infeasible;
  double best_obj = std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  auto try_subset = [&](const std::vector<int>& active) {
    const int rows = 6 + static_cast<int>(active.size());
    MatrixXd C(rows, dim);
    VectorXd d(rows);
    C.topRows(6) = prob.A_eq;
    d.head(6) = prob.b_eq;
    for (size_t k = 0; k < active.size(); ++k) {
      C.row(6 + k) = prob.A_in.row(active[k]);
      d[6 + k] = prob.b_in[active[k]];
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(C);
    const VectorXd v = cod.solve(d);
    if ((C * v - d).norm() > 1e-8) return;  // inconsistent equality system
    // primal feasibility
    for (int i = 0; i < n_in; ++i) {
      if (prob.A_in.row(i).dot(v) > prob.b_in[i] + 1e-9) return;
    }
    // dual feasibility for the active rows
    MatrixXd Ct(dim, rows);
    Ct.leftCols(6) = prob.A_eq.transpose();
    for (size_t k = 0; k < active.size(); ++k) Ct.col(6 + k) = prob.A_in.row(active[k]).transpose();
    const VectorXd lam = Ct.completeOrthogonalDecomposition().solve(-2.0 * v);
    if ((Ct * lam + 2.0 * v).norm() > 1e-7 * std::max(1.0, v.norm())) return;
    for (size_t k = 0; k < active.size(); ++k) {
      if (lam[6 + k] < -1e-7) return;
    }
    const double obj = v.squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best.v = v;
      best.objective = obj;
      best.status = gfo::QPStatus::Optimal;
      best.active_set = active;
    }
  };

  std::function<void(int, int)> recurse = [&](int start, int remaining) {
    try_subset(subset);
    if (remaining == 0) return;
    for (int i = start; i < n_in; ++i) {
      subset.push_back(i);
      recurse(i + 1, remaining - 1);
      subset.pop_back();
    }
  };
  recurse(0, max_active);

  if (best.status == gfo::QPStatus::Infeasible) {
    best.message = "no KKT-consistent feasible point";
  }
  return best;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "kinematics") return run_kinematics_suite(seed);
  if (name == "conservation") return run_conservation_suite(seed);
  if (name == "lemmas") return run_lemmas_suite(seed);
  if (name == "dual_form") return run_dual_form_suite(seed);
  if (name == "qp") return run_qp_suite(seed);
  if (name == "all") {
    SuiteResult all;
    all.suite = "all";
    all.pass = true;
    for (const auto& n : suite_names()) {
      if (n == "all") continue;
      const SuiteResult r = run_suite(n, seed);
      all.pass = all.pass && r.pass;
      for (const auto& line : r.lines) all.lines.push_back(n + ": " + line);
      for (const auto& ce : r.counterexamples) all.counterexamples.push_back(n + ": " + ce);
    }
    return all;
  }
  throw ConfigError("suite", "unknown suite '" + name + "'");
}

}  // namespace inhand::harness
