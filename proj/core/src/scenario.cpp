#include "inhand/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "inhand/analysis.hpp"
#include "inhand/errors.hpp"

namespace inhand::harness {

using nlohmann::json;

namespace {

Vec3 parse_vec3(const json& a, const std::string& path) {
  if (!a.is_array() || a.size() != 3) throw ConfigError(path, "expected [x, y, z]");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

Vec6 parse_vec6(const json& a, const std::string& path) {
  if (!a.is_array() || a.size() != 6) throw ConfigError(path, "expected 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = a[i].get<double>();
  return v;
}

Mat3 parse_mat3(const json& a, const std::string& path) {
  if (!a.is_array() || a.size() != 3) throw ConfigError(path, "expected 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = a[r][c].get<double>();
  }
  return m;
}

// a diagonal given as 6 numbers, or a full 6x6 matrix
Mat6 parse_mat6(const json& a, const std::string& path) {
  if (!a.is_array()) throw ConfigError(path, "expected 6 numbers or 6x6 matrix");
  if (a.size() == 6 && a[0].is_number()) {
    Mat6 m = Mat6::Zero();
    for (int i = 0; i < 6; ++i) m(i, i) = a[i].get<double>();
    return m;
  }
  if (a.size() == 6 && a[0].is_array()) {
    Mat6 m;
    for (int r = 0; r < 6; ++r) {
      if (a[r].size() != 6) throw ConfigError(path, "expected 6x6 matrix");
      for (int c = 0; c < 6; ++c) m(r, c) = a[r][c].get<double>();
    }
    return m;
  }
  throw ConfigError(path, "expected 6 numbers or 6x6 matrix");
}

json dump_vec(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json dump_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json dump_diag6(const Mat6& m) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(m(i, i));
  return a;
}

bool is_diagonal(const Mat6& m) {
  Mat6 d = m;
  d.diagonal().setZero();
  return d.cwiseAbs().maxCoeff() == 0.0;
}

json dump_mat6(const Mat6& m) {
  if (is_diagonal(m)) return dump_diag6(m);
  json rows = json::array();
  for (int r = 0; r < 6; ++r) {
    json row = json::array();
    for (int c = 0; c < 6; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (horizon <= 0.0) throw ConfigError("simulation.horizon", "must be positive");
  if (dt <= 0.0 || dt > 1e-2) throw ConfigError("simulation.dt", "must be in (0, 1e-2]");
  if (log_stride < 1) throw ConfigError("simulation.log_stride", "must be >= 1");
  hand.validate();
  object.validate();
  if (!initial_contacts.empty() &&
      static_cast<int>(initial_contacts.size()) != hand.contact_count()) {
    throw ConfigError("initial.contacts", "one contact per finger required");
  }
  if (initial_contacts.empty() && initial_q.size() != hand.joint_count()) {
    throw ConfigError("initial", "either contacts or a full q vector required");
  }
  if (controller_enabled) {
    if ((controller.reference.tolerance.array() <= 0.0).any()) {
      throw ConfigError("reference.tolerance", "must be componentwise positive");
    }
    if (controller.gains.k_f < 0.0) throw ConfigError("controller.k_f", "must be >= 0");
  }
}

ScenarioConfig load_scenario(const json& j, const std::string& base_dir) {
  ScenarioConfig cfg;
  cfg.name = j.value("name", "scenario");

  if (!j.contains("hand")) throw ConfigError("hand", "missing");
  if (j.at("hand").is_string()) {
    std::string p = j.at("hand").get<std::string>();
    if (!p.empty() && p[0] != '/' && !base_dir.empty()) p = base_dir + "/" + p;
    cfg.hand = kinematics::load_hand_file(p);
  } else {
    cfg.hand = kinematics::load_hand(j.at("hand"));
  }

  const auto& oj = j.at("object");
  cfg.object.mass = oj.at("mass").get<double>();
  const auto& sj = oj.at("shape");
  const std::string kind = sj.at("type").get<std::string>();
  if (kind == "box") {
    cfg.object.shape = geometry::Shape::box(parse_vec3(sj.at("half_extents"), "object.shape.half_extents"));
  } else if (kind == "sphere") {
    cfg.object.shape = geometry::Shape::sphere(sj.at("radius").get<double>());
  } else {
    throw ConfigError("object.shape.type", "expected 'box' or 'sphere'");
  }
  if (!oj.contains("inertia") || (oj.at("inertia").is_string() && oj.at("inertia") == "auto")) {
    cfg.inertia_auto = true;
    cfg.object.inertia_body = dynamics::ObjectModel::uniform_inertia(cfg.object.shape, cfg.object.mass);
  } else {
    cfg.inertia_auto = false;
    cfg.object.inertia_body = parse_mat3(oj.at("inertia"), "object.inertia");
  }
  if (oj.contains("pose")) {
    cfg.object.initial_pose.position = parse_vec3(oj.at("pose").at("position"), "object.pose.position");
    if (oj.at("pose").contains("rotation")) {
      cfg.object.initial_pose.rotation = parse_mat3(oj.at("pose").at("rotation"), "object.pose.rotation");
    }
  }

  const auto& ij = j.at("initial");
  if (ij.contains("contacts")) {
    for (const auto& cj : ij.at("contacts")) {
      ContactSpec cs;
      if (cj.at("finger").is_string()) {
        const std::string fname = cj.at("finger").get<std::string>();
        cs.finger = -1;
        for (int i = 0; i < cfg.hand.contact_count(); ++i) {
          if (cfg.hand.fingers[i].name == fname) cs.finger = i;
        }
        if (cs.finger < 0) throw ConfigError("initial.contacts.finger", "unknown finger " + fname);
      } else {
        cs.finger = cj.at("finger").get<int>();
      }
      cs.point = parse_vec3(cj.at("point"), "initial.contacts.point");
      cfg.initial_contacts.push_back(cs);
    }
  } else if (ij.contains("q")) {
    const auto& qj = ij.at("q");
    cfg.initial_q.resize(qj.size());
    for (size_t k = 0; k < qj.size(); ++k) cfg.initial_q[k] = qj[k].get<double>();
  } else {
    throw ConfigError("initial", "needs 'contacts' or 'q'");
  }

  if (j.contains("controller")) {
    const auto& cj = j.at("controller");
    cfg.controller_enabled = cj.value("enabled", true);
    const std::string type = cj.value("type", "proposed");
    if (type == "proposed") {
      cfg.controller.kind = control::ControllerKind::Proposed;
    } else if (type == "baseline") {
      cfg.controller.kind = control::ControllerKind::Baseline;
    } else {
      throw ConfigError("controller.type", "expected 'proposed' or 'baseline'");
    }
    const std::string frame = cj.value("task_frame", "blind");
    if (frame == "blind") {
      cfg.controller.frame = control::TaskFrameMode::Blind;
    } else if (frame == "tactile") {
      cfg.controller.frame = control::TaskFrameMode::Tactile;
    } else if (frame == "oracle_pose") {
      cfg.controller.frame = control::TaskFrameMode::OraclePose;
    } else {
      throw ConfigError("controller.task_frame", "expected blind|tactile|oracle_pose");
    }
    const std::string internal = cj.value("internal_force", "centroid");
    if (internal == "centroid") {
      cfg.controller.internal_force = control::InternalForceMode::Centroid;
    } else if (internal == "gfo") {
      cfg.controller.internal_force = control::InternalForceMode::Gfo;
    } else {
      throw ConfigError("controller.internal_force", "expected centroid|gfo");
    }

    const auto& gj = cj.at("gains");
    const double k_f = cj.value("k_f", 0.0);
    if (gj.contains("epsilon")) {
      const double eps = gj.at("epsilon").get<double>();
      if (eps <= 0.0) throw ConfigError("controller.gains.epsilon", "must be positive");
      cfg.controller.gains = control::GainConfig::from_epsilon(
          parse_mat6(gj.at("M_bar"), "controller.gains.M_bar"),
          parse_mat6(gj.at("K1"), "controller.gains.K1"),
          parse_mat6(gj.at("K2"), "controller.gains.K2"), eps, k_f);
      cfg.mbar_auto = gj.value("M_bar_auto", false);
    } else {
      cfg.controller.gains = control::GainConfig::direct(
          parse_mat6(gj.at("Kp"), "controller.gains.Kp"),
          parse_mat6(gj.at("Ki"), "controller.gains.Ki"),
          parse_mat6(gj.at("Kd"), "controller.gains.Kd"), k_f);
    }

    if (j.contains("reference")) {
      cfg.controller.reference.delta_r = parse_vec6(j.at("reference").at("delta_r"), "reference.delta_r");
      if (j.at("reference").contains("tolerance")) {
        cfg.controller.reference.tolerance =
            parse_vec6(j.at("reference").at("tolerance"), "reference.tolerance");
      }
    }

    if (cj.contains("gfo")) {
      cfg.controller.gfo.cone.mu = cj.at("gfo").value("mu", 0.5);
      cfg.controller.gfo.cone.sides = cj.at("gfo").value("sides", 8);
      cfg.controller.gfo.f_min = cj.at("gfo").value("f_min", 0.5);
      if (!cfg.controller.gfo.cone.valid()) throw ConfigError("controller.gfo", "invalid cone");
    }
    if (cj.contains("dither")) {
      const auto& dj = cj.at("dither");
      cfg.controller.dither.enabled = dj.value("enabled", false);
      cfg.controller.dither.frequency = dj.value("frequency", 150.0);
      cfg.controller.dither.gate_on_tolerance = dj.value("gate_on_tolerance", true);
      if (cfg.controller.dither.frequency <= 0.0)
        throw ConfigError("controller.dither.frequency", "must be positive");
      if (dj.contains("amplitude")) {
        const auto& aj = dj.at("amplitude");
        const auto& bj = dj.at("offset");
        if (aj.size() != static_cast<size_t>(cfg.hand.joint_count()) || aj.size() != bj.size())
          throw ConfigError("controller.dither", "amplitude/offset need one entry per joint");
        cfg.controller.dither.amplitude.resize(aj.size());
        cfg.controller.dither.offset.resize(bj.size());
        for (size_t k = 0; k < aj.size(); ++k) {
          cfg.controller.dither.amplitude[k] = aj[k].get<double>();
          cfg.controller.dither.offset[k] = bj[k].get<double>();
        }
      } else {
        const auto def = control::default_dither_table(cfg.hand.fingers[0].dof());
        cfg.controller.dither.amplitude = def.amplitude;
        cfg.controller.dither.offset = def.offset;
      }
    }
    if (cj.contains("compensators")) {
      const auto& xj = cj.at("compensators");
      cfg.controller.compensators.enabled = xj.value("enabled", false);
      cfg.controller.compensators.object_mass_estimate = xj.value("object_mass_estimate", 0.0);
      cfg.controller.compensators.hand_gravity = xj.value("hand_gravity", true);
    }
    if (cj.contains("anti_windup")) {
      const auto& aj = cj.at("anti_windup");
      cfg.controller.anti_windup.enabled = aj.value("enabled", false);
      cfg.controller.anti_windup.cap = aj.value("cap", 50.0);
      cfg.controller.anti_windup.freeze_on_saturation = aj.value("freeze_on_saturation", true);
    }
    cfg.controller.torque_limit = cj.value("torque_limit", 0.0);
    cfg.controller.integrator_gate_on_tolerance = cj.value("integrator_gate_on_tolerance", false);
  } else {
    cfg.controller_enabled = false;
  }

  if (j.contains("disturbances")) {
    const auto& dj = j.at("disturbances");
    cfg.disturbances.joint_viscous = dj.value("joint_viscous", 0.0);
    if (dj.contains("gravity")) cfg.disturbances.gravity = parse_vec3(dj.at("gravity"), "disturbances.gravity");
    cfg.disturbances.hand_gravity = dj.value("hand_gravity", false);
    if (dj.contains("extra_wrench")) {
      const auto& wj = dj.at("extra_wrench");
      if (wj.contains("constant"))
        cfg.disturbances.wrench_constant = parse_vec6(wj.at("constant"), "disturbances.extra_wrench.constant");
      if (wj.contains("amplitude"))
        cfg.disturbances.wrench_amplitude = parse_vec6(wj.at("amplitude"), "disturbances.extra_wrench.amplitude");
      cfg.disturbances.wrench_frequency = wj.value("frequency", 0.0);
    }
  }
  cfg.controller.compensators.gravity = cfg.disturbances.gravity;

  if (j.contains("simulation")) {
    const auto& sj2 = j.at("simulation");
    cfg.dt = sj2.value("dt", 1e-4);
    cfg.horizon = sj2.value("horizon", 10.0);
    cfg.log_stride = sj2.value("log_stride", 10);
    cfg.gap_tolerance = sj2.value("gap_tolerance", 1e-4);
    cfg.constraint_tolerance = sj2.value("constraint_tolerance", 1e-6);
    cfg.invariant_gap = sj2.value("invariant_gap", 1e-5);
    cfg.grasp_checks = sj2.value("grasp_checks", true);
    cfg.seed = sj2.value("seed", 0);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }
  std::string base_dir = ".";
  const auto slash = path.find_last_of('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return load_scenario(j, base_dir);
}

json scenario_schema() {
  return json{
      {"version", 1},
      {"name", "string"},
      {"hand", "inline hand object (see hand schema) or path to a hand file"},
      {"object",
       json{{"mass", "kg"},
            {"shape", "{type: box, half_extents: [x,y,z]} | {type: sphere, radius: r}"},
            {"inertia", "'auto' (uniform density) or 3x3 matrix, kg m^2"},
            {"pose", "{position: [x,y,z] m, rotation: 3x3 (optional)}"}}},
      {"initial",
       json{{"contacts", "[{finger: index-or-name, point: [x,y,z] on the surface}]"},
            {"q", "alternative: full joint vector, rad"}}},
      {"reference", json{{"delta_r", "6-vector (m, gamma units)"},
                         {"tolerance", "6-vector band for settling/gating"}}},
      {"controller",
       json{{"enabled", "bool (default true)"},
            {"type", "proposed | baseline"},
            {"task_frame", "blind | tactile | oracle_pose"},
            {"internal_force", "centroid | gfo"},
            {"k_f", "internal force gain, N/m"},
            {"gains",
             "{epsilon, M_bar, K1, K2, M_bar_auto?} or {Kp, Ki, Kd}; matrices as 6 diag "
             "entries or 6x6"},
            {"gfo", "{mu, sides, f_min}"},
            {"dither",
             "{enabled, frequency Hz, gate_on_tolerance, amplitude[], offset[]} (defaults: "
             "built-in per-joint table)"},
            {"compensators", "{enabled, object_mass_estimate kg, hand_gravity}"},
            {"anti_windup", "{enabled, cap, freeze_on_saturation}"},
            {"torque_limit", "N m per joint, 0 = off"},
            {"integrator_gate_on_tolerance", "bool"}}},
      {"disturbances",
       json{{"joint_viscous", "N m s/rad"},
            {"gravity", "[x,y,z] m/s^2 (acts on the object; on the hand when hand_gravity)"},
            {"hand_gravity", "bool"},
            {"extra_wrench", "{constant: 6, amplitude: 6, frequency: Hz}"}}},
      {"simulation",
       json{{"dt", "s, (0, 1e-2]"},
            {"horizon", "s"},
            {"log_stride", "steps between log rows"},
            {"gap_tolerance", "m, contact-lost threshold"},
            {"constraint_tolerance", "rolling-constraint residual bound"},
            {"invariant_gap", "m, logged-gap integrity bound"},
            {"grasp_checks", "bool"},
            {"seed", "uint"}}}};
}

InitialSetup setup_initial_state(const ScenarioConfig& cfg) {
  InitialSetup s;
  s.hand = cfg.hand;
  const auto& pose = cfg.object.initial_pose;
  const int m = s.hand.joint_count();

  VectorXd q(m);
  if (!cfg.initial_contacts.empty()) {
    for (const auto& cs : cfg.initial_contacts) {
      auto& finger = s.hand.fingers[cs.finger];
      const auto sp = geometry::closest_point(cfg.object.shape, pose, cs.point);
      if (std::abs(sp.signed_distance) > 1e-9 || (sp.point - cs.point).norm() > 1e-9) {
        throw ConfigError("initial.contacts", "point is not on the object surface");
      }
      const Vec3 center_target = cs.point + finger.fingertip_radius * sp.normal;
      const VectorXd qi = kinematics::solve_finger_ik(finger, center_target);
      q.segment(s.hand.joint_offset(cs.finger), finger.dof()) = qi;
      const auto fk = kinematics::finger_fk(finger, qi);
      finger.p_ft_offset0 = fk.tip_body().inverse(cs.point) - finger.fingertip_center0;
    }
  } else {
    q = cfg.initial_q;
    const auto gk = dynamics::eval_grasp(s.hand, cfg.object.shape, pose, q, cfg.gap_tolerance);
    for (int i = 0; i < s.hand.contact_count(); ++i) {
      auto& finger = s.hand.fingers[i];
      finger.p_ft_offset0 =
          gk.fk[i].tip_body().inverse(gk.contacts[i].p_c) - finger.fingertip_center0;
    }
  }

  const auto gk = dynamics::eval_grasp(s.hand, cfg.object.shape, pose, q, cfg.gap_tolerance);
  for (const auto& c : gk.contacts) {
    if (std::abs(c.gap) > 1e-8) {
      throw ConfigError("initial", "initial grasp leaves a contact gap of " + std::to_string(c.gap));
    }
  }
  // early singularity checks
  kinematics::j_a(kinematics::task_jacobian(s.hand, q), gk.J_h, gk.G);
  kinematics::s_matrix(kinematics::virtual_frame(kinematics::tracked_points(s.hand, q)).R_pa);

  s.state.q = q;
  s.state.qdot = VectorXd::Zero(m);
  s.state.object_pose = pose;
  s.state.xdot_o = Vec6::Zero();
  s.state.contacts = gk.contacts;
  s.state.t = 0.0;
  return s;
}

namespace {

Mat6 task_inertia_at(const ScenarioConfig& cfg, const kinematics::HandModel& hand,
                     const geometry::Pose& pose, const VectorXd& q) {
  const auto gk = dynamics::eval_grasp(hand, cfg.object.shape, pose, q, 1e-2);
  const auto terms = dynamics::assemble_coupled(hand, cfg.object, pose, q, Vec6::Zero(), gk);
  const MatrixXd dxdq = kinematics::task_jacobian(hand, q);
  const Mat6 J_a = kinematics::j_a(dxdq, gk.J_h, gk.G);
  return analysis::task_inertia(J_a, terms.M_ho);
}

}  // namespace

Mat6 auto_m_bar(const ScenarioConfig& cfg, const InitialSetup& setup, double margin) {
  std::mt19937_64 rng(cfg.seed + 17);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // cover the closed-loop transient excursions, not just the commanded change
  const Vec3 dp = cfg.controller.reference.delta_r.head<3>();
  const Vec3 dr = cfg.controller.reference.delta_r.tail<3>();
  const double pos_mag = margin * std::max(dp.norm(), 0.015);
  const double rot_mag = margin * std::max(dr.norm(), 0.22);

  std::vector<Mat6> samples;
  samples.push_back(task_inertia_at(cfg, setup.hand, setup.state.object_pose, setup.state.q));

  const int n_samples = 24;
  const int substeps = 8;
  for (int sidx = 0; sidx < n_samples; ++sidx) {
    Vec6 dir;
    for (int i = 0; i < 6; ++i) dir[i] = gauss(rng);
    dir.head<3>() = dir.head<3>().normalized() * pos_mag;
    dir.tail<3>() = dir.tail<3>().normalized() * rot_mag;

    VectorXd q = setup.state.q;
    geometry::Pose pose = setup.state.object_pose;
    bool ok = true;
    for (int k = 0; k < substeps; ++k) {
      try {
        const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape, pose, q, 1e-2);
        q += gk.qdot_from(dir) / substeps;
        pose.position += dir.head<3>() / substeps;
        pose.rotation = rotation_exp(dir.tail<3>() / substeps) * pose.rotation;
      } catch (const Error&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    try {
      samples.push_back(task_inertia_at(cfg, setup.hand, pose, q));
    } catch (const Error&) {
    }
  }

  Vec6 d = Vec6::Zero();
  for (const auto& Ma : samples) d = d.cwiseMax(Ma.diagonal());

  // shrink individual entries until every sampled pencil eigenvalue sits
  // inside (0, cap); headroom below 2 covers states between samples
  const double cap = 1.5;
  for (int iter = 0; iter < 600; ++iter) {
    double lam_max = 0.0;
    Vec6 v_max = Vec6::Zero();
    for (const auto& Ma : samples) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat6> es(Vec6(d).asDiagonal(), Ma);
      for (int i = 0; i < 6; ++i) {
        if (es.eigenvalues()[i] > lam_max) {
          lam_max = es.eigenvalues()[i];
          v_max = es.eigenvectors().col(i);
        }
      }
    }
    if (lam_max <= cap) break;
    int worst = 0;
    double best = -1.0;
    for (int i = 0; i < 6; ++i) {
      const double contrib = d[i] * v_max[i] * v_max[i];
      if (contrib > best) {
        best = contrib;
        worst = i;
      }
    }
    d[worst] *= 0.85;
  }
  return Vec6(d).asDiagonal();
}

ScenarioConfig resolve_gains(const ScenarioConfig& cfg, const InitialSetup& setup) {
  ScenarioConfig out = cfg;
  if (cfg.mbar_auto && cfg.controller.gains.has_epsilon_form()) {
    const Mat6 M_bar = auto_m_bar(cfg, setup);
    out.controller.gains = control::GainConfig::from_epsilon(
        M_bar, cfg.controller.gains.K1, cfg.controller.gains.K2, cfg.controller.gains.epsilon,
        cfg.controller.gains.k_f);
  }
  return out;
}

json resolved_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["object"] = {
      {"mass", cfg.object.mass},
      {"pose", {{"position", dump_vec3(cfg.object.initial_pose.position)}}},
  };
  switch (cfg.object.shape.kind) {
    case geometry::Shape::Kind::Box:
      j["object"]["shape"] = {{"type", "box"},
                              {"half_extents", dump_vec3(cfg.object.shape.half_extents)}};
      break;
    case geometry::Shape::Kind::Sphere:
      j["object"]["shape"] = {{"type", "sphere"}, {"radius", cfg.object.shape.radius}};
      break;
  }
  json inertia = json::array();
  for (int r = 0; r < 3; ++r) {
    inertia.push_back(json::array({cfg.object.inertia_body(r, 0), cfg.object.inertia_body(r, 1),
                                   cfg.object.inertia_body(r, 2)}));
  }
  j["object"]["inertia"] = inertia;

  if (!cfg.initial_contacts.empty()) {
    json contacts = json::array();
    for (const auto& cs : cfg.initial_contacts) {
      contacts.push_back({{"finger", cs.finger}, {"point", dump_vec3(cs.point)}});
    }
    j["initial"] = {{"contacts", contacts}};
  } else {
    j["initial"] = {{"q", dump_vec(cfg.initial_q)}};
  }

  if (cfg.controller_enabled) {
    json cj;
    cj["type"] = cfg.controller.kind == control::ControllerKind::Proposed ? "proposed" : "baseline";
    cj["task_frame"] = cfg.controller.frame == control::TaskFrameMode::Blind      ? "blind"
                       : cfg.controller.frame == control::TaskFrameMode::Tactile ? "tactile"
                                                                                 : "oracle_pose";
    cj["internal_force"] =
        cfg.controller.internal_force == control::InternalForceMode::Centroid ? "centroid" : "gfo";
    cj["k_f"] = cfg.controller.gains.k_f;
    if (cfg.controller.gains.has_epsilon_form()) {
      cj["gains"] = {{"epsilon", cfg.controller.gains.epsilon},
                     {"M_bar", dump_mat6(cfg.controller.gains.M_bar)},
                     {"K1", dump_mat6(cfg.controller.gains.K1)},
                     {"K2", dump_mat6(cfg.controller.gains.K2)}};
      if (cfg.mbar_auto) cj["gains"]["M_bar_auto"] = true;
    } else {
      cj["gains"] = {{"Kp", dump_mat6(cfg.controller.gains.Kp)},
                     {"Ki", dump_mat6(cfg.controller.gains.Ki)},
                     {"Kd", dump_mat6(cfg.controller.gains.Kd)}};
    }
    cj["derived_gains"] = {{"Kp", dump_mat6(cfg.controller.gains.Kp)},
                           {"Ki", dump_mat6(cfg.controller.gains.Ki)},
                           {"Kd", dump_mat6(cfg.controller.gains.Kd)}};
    if (cfg.controller.internal_force == control::InternalForceMode::Gfo) {
      cj["gfo"] = {{"mu", cfg.controller.gfo.cone.mu},
                   {"sides", cfg.controller.gfo.cone.sides},
                   {"f_min", cfg.controller.gfo.f_min}};
    }
    if (cfg.controller.dither.enabled) {
      cj["dither"] = {{"enabled", true},
                      {"frequency", cfg.controller.dither.frequency},
                      {"gate_on_tolerance", cfg.controller.dither.gate_on_tolerance},
                      {"amplitude", dump_vec(cfg.controller.dither.amplitude)},
                      {"offset", dump_vec(cfg.controller.dither.offset)}};
    }
    if (cfg.controller.compensators.enabled) {
      cj["compensators"] = {
          {"enabled", true},
          {"object_mass_estimate", cfg.controller.compensators.object_mass_estimate},
          {"hand_gravity", cfg.controller.compensators.hand_gravity}};
    }
    if (cfg.controller.anti_windup.enabled) {
      cj["anti_windup"] = {{"enabled", true},
                           {"cap", cfg.controller.anti_windup.cap},
                           {"freeze_on_saturation", cfg.controller.anti_windup.freeze_on_saturation}};
    }
    if (cfg.controller.torque_limit > 0.0) cj["torque_limit"] = cfg.controller.torque_limit;
    if (cfg.controller.integrator_gate_on_tolerance) cj["integrator_gate_on_tolerance"] = true;
    j["controller"] = cj;
    j["reference"] = {{"delta_r", dump_vec(cfg.controller.reference.delta_r)},
                      {"tolerance", dump_vec(cfg.controller.reference.tolerance)}};
  }

  j["disturbances"] = {{"joint_viscous", cfg.disturbances.joint_viscous},
                       {"gravity", dump_vec3(cfg.disturbances.gravity)},
                       {"hand_gravity", cfg.disturbances.hand_gravity}};
  if (cfg.disturbances.wrench_constant.norm() > 0.0 || cfg.disturbances.time_varying()) {
    j["disturbances"]["extra_wrench"] = {{"constant", dump_vec(cfg.disturbances.wrench_constant)},
                                         {"amplitude", dump_vec(cfg.disturbances.wrench_amplitude)},
                                         {"frequency", cfg.disturbances.wrench_frequency}};
  }
  j["simulation"] = {{"dt", cfg.dt},
                     {"horizon", cfg.horizon},
                     {"log_stride", cfg.log_stride},
                     {"gap_tolerance", cfg.gap_tolerance},
                     {"constraint_tolerance", cfg.constraint_tolerance},
                     {"invariant_gap", cfg.invariant_gap},
                     {"grasp_checks", cfg.grasp_checks},
                     {"seed", cfg.seed}};
  return j;
}

json demo_hand_json() {
  auto finger = [](const std::string& name, const Vec3& base, bool mirrored, double L1,
                   double L2, double L3, double m1, double m2, double m3) {
    json f;
    f["name"] = name;
    f["base_position"] = dump_vec3(base);
    if (mirrored) {
      f["base_rotation"] = json::array({json::array({-1.0, 0.0, 0.0}),
                                        json::array({0.0, -1.0, 0.0}),
                                        json::array({0.0, 0.0, 1.0})});
    }
    f["joints"] = json::array({json{{"axis", {1.0, 0.0, 0.0}}, {"origin", {0.0, 0.0, 0.0}}},
                               json{{"axis", {0.0, 1.0, 0.0}}, {"origin", {0.0, 0.0, 0.0}}},
                               json{{"axis", {0.0, 1.0, 0.0}}, {"origin", {0.0, 0.0, L1}}}});
    const double w = 0.0196;
    f["links"] = json::array(
        {json{{"body", 2}, {"start", {0.0, 0.0, 0.0}}, {"end", {0.0, 0.0, L1}}, {"width", w}, {"depth", w}, {"mass", m1}},
         json{{"body", 3}, {"start", {0.0, 0.0, L1}}, {"end", {0.0, 0.0, L1 + L2}}, {"width", w}, {"depth", w}, {"mass", m2}},
         json{{"body", 3}, {"start", {0.0, 0.0, L1 + L2}}, {"end", {0.0, 0.0, L1 + L2 + L3}}, {"width", w}, {"depth", w}, {"mass", m3}}});
    f["fingertip"] = json{{"center", {0.0, 0.0, L1 + L2 + L3}}, {"radius", 0.01}};
    f["ik_seed"] = json::array({0.0, -0.8, 1.0});
    return f;
  };

  json j;
  j["version"] = 1;
  j["name"] = "allegro3";
  j["fingers"] = json::array(
      {finger("index", Vec3(0.0677, 0.075, 0.0), false, 0.0540, 0.0384, 0.0250, 0.0444, 0.0325, 0.0619),
       finger("middle", Vec3(0.0677, -0.025, 0.0), false, 0.0540, 0.0384, 0.0250, 0.0444, 0.0325, 0.0619),
       finger("thumb", Vec3(-0.0877, 0.025, 0.0), true, 0.0554, 0.0514, 0.0400, 0.0176, 0.0499, 0.0556)});
  return j;
}

std::vector<std::string> demo_scenario_names() {
  return {"proposed_m005", "proposed_m010", "proposed_m020", "baseline_m005", "baseline_m010",
          "baseline_m020", "gfo_m020", "tactile_m020", "oracle_m020"};
}

json demo_scenario_json(const std::string& name) {
  double mass = 0.20;
  std::string type = "proposed";
  std::string frame = "blind";
  std::string internal = "centroid";
  if (name == "proposed_m005" || name == "baseline_m005") mass = 0.05;
  if (name == "proposed_m010" || name == "baseline_m010") mass = 0.10;
  if (name.rfind("baseline", 0) == 0) type = "baseline";
  if (name == "gfo_m020") internal = "gfo";
  if (name == "tactile_m020") frame = "tactile";
  if (name == "oracle_m020") frame = "oracle_pose";
  bool known = false;
  for (const auto& n : demo_scenario_names()) known = known || n == name;
  if (!known) throw ConfigError("scenario", "unknown demo scenario " + name);

  json j;
  j["name"] = name;
  j["hand"] = "hand_allegro3.json";
  j["object"] = {{"mass", mass},
                 {"shape", {{"type", "box"}, {"half_extents", {0.0177, 0.10, 0.0177}}}},
                 {"inertia", "auto"},
                 {"pose", {{"position", {0.0, 0.0, 0.095}}}}};
  j["initial"] = {{"contacts",
                   json::array({json{{"finger", "index"}, {"point", {0.0177, 0.075, 0.095}}},
                                json{{"finger", "middle"}, {"point", {0.0177, -0.025, 0.095}}},
                                json{{"finger", "thumb"}, {"point", {-0.0177, 0.025, 0.0844}}}})}};
  j["reference"] = {{"delta_r", {0.0, -0.01, -0.02, 0.0, 0.0, 0.0}},
                    {"tolerance", {0.004, 0.004, 0.004, 0.06, 0.06, 0.06}}};
  // K1, K2 and epsilon as in the reproduction study; M_bar rebuilt from the
  // sampled task inertia so the contraction condition certifies on this hand
  j["controller"] = {{"type", type},
                     {"task_frame", frame},
                     {"internal_force", internal},
                     {"k_f", 80.0},
                     {"gains",
                      {{"epsilon", 0.008},
                       {"M_bar", {1.0, 1.0, 1.0, 0.01, 0.01, 0.01}},
                       {"M_bar_auto", true},
                       {"K1", {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
                       {"K2", {2.5, 2.5, 2.5, 2.5, 2.5, 2.5}}}}};
  if (internal == "gfo") {
    j["controller"]["gfo"] = {{"mu", 0.5}, {"sides", 8}, {"f_min", 0.5}};
  }
  j["disturbances"] = {{"joint_viscous", 0.001}, {"gravity", {0.0, 0.0, -9.81}}};
  j["simulation"] = {{"dt", 1e-4}, {"horizon", 10.0}, {"log_stride", 10}, {"seed", 1}};
  return j;
}

}  // namespace inhand::harness
