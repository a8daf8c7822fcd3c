#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "inhand/dynamics.hpp"
#include "inhand/scenario.hpp"
#include "inhand/verify.hpp"

using namespace inhand;
using namespace inhand::dynamics;
using kinematics::FingerModel;
using kinematics::HandModel;
using kinematics::LinkSegment;

namespace {

HandModel pendulum_hand(double mass, double length, double width, const Vec3& joint_origin,
                        const Vec3& link_start) {
  FingerModel f;
  f.name = "pendulum";
  f.joints.push_back({Vec3::UnitZ(), joint_origin});
  LinkSegment link;
  link.body = 1;
  link.start = link_start;
  link.end = link_start + Vec3(length, 0, 0);
  link.width = width;
  link.depth = width;
  link.mass = mass;
  f.links.push_back(link);
  f.fingertip_center0 = link.end;
  HandModel hand;
  hand.fingers = {f, f, f};  // contact-count floor; only finger 0 is probed
  return hand;
}

harness::ScenarioConfig demo_cfg(const std::string& name) {
  nlohmann::json j = harness::demo_scenario_json(name);
  j["hand"] = harness::demo_hand_json();
  return harness::load_scenario(j, "");
}

}  // namespace

TEST_CASE("hand inertia of elementary bodies") {
  SUBCASE("pendulum about its pivot") {
    const double m = 0.2, L = 0.3, w = 0.02;
    const HandModel hand = pendulum_hand(m, L, w, Vec3::Zero(), Vec3::Zero());
    const MatrixXd M = hand_inertia(hand, VectorXd::Zero(3));
    const double I_center = m / 12.0 * (L * L + w * w);
    const double expected = I_center + m * (L / 2.0) * (L / 2.0);
    CHECK(M(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("uniform cuboid moment about its center") {
    // joint placed at the cuboid center isolates the central moment
    const double m = 0.0444, L = 0.0540, w = 0.0196;
    const HandModel hand = pendulum_hand(m, L, w, Vec3(L / 2.0, 0, 0), Vec3::Zero());
    const MatrixXd M = hand_inertia(hand, VectorXd::Zero(3));
    CHECK(M(0, 0) == doctest::Approx(1.221e-5).epsilon(2e-4));
    CHECK(M(0, 0) == doctest::Approx(m * (L * L + w * w) / 12.0).epsilon(1e-12));
  }
}

TEST_CASE("hand Coriolis matrix keeps Mdot - 2C skew") {
  const HandModel hand = kinematics::load_hand(harness::demo_hand_json());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd q(hand.joint_count()), qdot(hand.joint_count());
    for (int i = 0; i < q.size(); ++i) {
      q[i] = 0.7 * g(rng);
      qdot[i] = g(rng);
    }
    const MatrixXd C = hand_coriolis(hand, q, qdot);
    const double h = 1e-6;
    const MatrixXd Mdot =
        (hand_inertia(hand, q + h * qdot) - hand_inertia(hand, q - h * qdot)) / (2 * h);
    const MatrixXd S = Mdot - 2.0 * C;
    for (int rep = 0; rep < 5; ++rep) {
      VectorXd v(q.size());
      for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
      worst = std::max(worst, std::abs(v.dot(S * v)) / v.squaredNorm());
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("object inertia and Coriolis terms") {
  ObjectModel obj;
  obj.mass = 0.2;
  obj.inertia_body = Vec3(0.0418e-3, 0.6876e-3, 0.6876e-3).asDiagonal();
  obj.shape = geometry::Shape::box(Vec3(0.0177, 0.10, 0.0177));

  SUBCASE("diagonal blocks at identity orientation") {
    const auto [M, C] = object_terms(obj, geometry::Pose{}, Vec6::Zero());
    Vec6 expected;
    expected << 0.2, 0.2, 0.2, 4.18e-5, 6.876e-4, 6.876e-4;
    CHECK((M.diagonal() - expected).norm() < 1e-12);
    CHECK(C.norm() == 0.0);
  }
  SUBCASE("uniform-density inertia reproduces the configured matrix") {
    const Mat3 I = ObjectModel::uniform_inertia(obj.shape, 0.2);
    CHECK(I(0, 0) == doctest::Approx(0.0418e-3).epsilon(2e-3));
    CHECK(I(1, 1) == doctest::Approx(0.6876e-3).epsilon(2e-3));
    CHECK(I(2, 2) == doctest::Approx(0.6876e-3).epsilon(2e-3));
  }
  SUBCASE("Mdot - 2C stays skew along rotations") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      geometry::Pose pose;
      pose.rotation = rotation_exp(Vec3(g(rng), g(rng), g(rng)));
      Vec6 xdot;
      for (int i = 0; i < 6; ++i) xdot[i] = g(rng);
      const auto [M, C] = object_terms(obj, pose, xdot);
      const double h = 1e-6;
      geometry::Pose pp = pose, pm = pose;
      pp.rotation = rotation_exp(h * Vec3(xdot.tail<3>())) * pose.rotation;
      pm.rotation = rotation_exp(-h * Vec3(xdot.tail<3>())) * pose.rotation;
      const Mat6 Mdot =
          (object_terms(obj, pp, xdot).first - object_terms(obj, pm, xdot).first) / (2 * h);
      const Mat6 S = Mdot - 2.0 * C;
      for (int rep = 0; rep < 5; ++rep) {
        Vec6 v;
        for (int i = 0; i < 6; ++i) v[i] = g(rng);
        worst = std::max(worst, std::abs(v.dot(S * v)) / v.squaredNorm());
      }
    }
    CHECK(worst <= 1e-6);
  }
  SUBCASE("triangle inequality validation") {
    ObjectModel bad = obj;
    bad.inertia_body = Vec3(1.0, 0.1, 0.1).asDiagonal();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}

TEST_CASE("coupled terms") {
  const auto cfg = demo_cfg("proposed_m020");
  const auto setup = harness::setup_initial_state(cfg);
  const auto gk = eval_grasp(setup.hand, cfg.object.shape, setup.state.object_pose,
                             setup.state.q, 1e-2);

  SUBCASE("massless hand reduces to the object inertia") {
    auto hand_json = harness::demo_hand_json();
    for (auto& f : hand_json["fingers"]) {
      for (auto& l : f["links"]) l["mass"] = 1e-12;
    }
    auto light = kinematics::load_hand(hand_json);
    for (int i = 0; i < light.contact_count(); ++i) {
      light.fingers[i].p_ft_offset0 = setup.hand.fingers[i].p_ft_offset0;
    }
    const auto gk2 = eval_grasp(light, cfg.object.shape, setup.state.object_pose,
                                setup.state.q, 1e-2);
    const auto terms = assemble_coupled(light, cfg.object, setup.state.object_pose,
                                        setup.state.q, Vec6::Zero(), gk2);
    const auto [M_o, C_o] = object_terms(cfg.object, setup.state.object_pose, Vec6::Zero());
    CHECK((terms.M_ho - M_o).norm() < 1e-9);
  }
  SUBCASE("Coriolis coupling vanishes at rest") {
    const auto terms = assemble_coupled(setup.hand, cfg.object, setup.state.object_pose,
                                        setup.state.q, Vec6::Zero(), gk);
    CHECK(terms.C_ho.norm() < 1e-12);
  }
  SUBCASE("coupled inertia stays positive definite over sampled grasps") {
    const auto grasps = harness::sample_grasps(100, 11);
    CHECK(grasps.size() >= 80);
    double min_eig = 1e9;
    for (const auto& sg : grasps) {
      const auto gk2 = eval_grasp(sg.hand, sg.object.shape, sg.state.object_pose, sg.state.q,
                                  1e-2);
      const auto terms = assemble_coupled(sg.hand, sg.object, sg.state.object_pose, sg.state.q,
                                          sg.state.xdot_o, gk2);
      Eigen::SelfAdjointEigenSolver<Mat6> es(terms.M_ho);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      CHECK((terms.M_ho - terms.M_ho.transpose()).norm() < 1e-10);
    }
    CHECK(min_eig > 0.0);
  }
}

TEST_CASE("forward dynamics") {
  auto cfg = demo_cfg("proposed_m010");
  const auto setup = harness::setup_initial_state(cfg);
  const int m = cfg.hand.joint_count();

  SUBCASE("force balance holds the object still") {
    const auto gk = eval_grasp(setup.hand, cfg.object.shape, setup.state.object_pose,
                               setup.state.q, 1e-2);
    // torque that cancels the weight through the true grasp map
    const Vec6 w_e = cfg.disturbances.external_wrench(0.0, cfg.object.mass);
    const MatrixXd Gt = gk.G.transpose();
    const Mat6 GGt = gk.G * gk.G.transpose();
    const VectorXd f = Gt * GGt.ldlt().solve(-w_e);
    const VectorXd u = gk.J_h.transpose() * f;
    const auto fd = forward_dynamics(setup.hand, cfg.object, setup.state.object_pose,
                                     setup.state.q, Vec6::Zero(), u, cfg.disturbances, 0.0);
    CHECK(fd.xddot_o.norm() < 1e-9);
  }
  SUBCASE("free rest state stays at rest without gravity") {
    DisturbanceModel none;
    const auto fd = forward_dynamics(setup.hand, cfg.object, setup.state.object_pose,
                                     setup.state.q, Vec6::Zero(), VectorXd::Zero(m), none, 0.0);
    CHECK(fd.xddot_o.norm() < 1e-12);
    CHECK(fd.qddot.norm() < 1e-12);
  }
  SUBCASE("contact forces reproduce the commanded squeeze at rest") {
    DisturbanceModel none;
    const auto gk = eval_grasp(setup.hand, cfg.object.shape, setup.state.object_pose,
                               setup.state.q, 1e-2);
    const auto pts = kinematics::tracked_points(setup.hand, setup.state.q);
    Vec3 p_a = Vec3::Zero();
    for (const auto& p : pts) p_a += p;
    p_a /= 3.0;
    VectorXd squeeze(9);
    for (int i = 0; i < 3; ++i) squeeze.segment<3>(3 * i) = 20.0 * (p_a - pts[i]);
    const VectorXd u = gk.J_h.transpose() * squeeze;
    const auto fd = forward_dynamics(setup.hand, cfg.object, setup.state.object_pose,
                                     setup.state.q, Vec6::Zero(), u, none, 0.0);
    const VectorXd fn = contact_normal_forces(gk, fd.f_c);
    CHECK((fn.array() > 0.0).all());
    // an internal squeeze balances: zero object acceleration
    CHECK(fd.xddot_o.norm() < 1e-8);
  }
}

TEST_CASE("integration step") {
  auto cfg = demo_cfg("proposed_m010");
  const auto setup = harness::setup_initial_state(cfg);
  const int m = cfg.hand.joint_count();

  SUBCASE("equilibrium is preserved step to step") {
    DisturbanceModel none;
    StepOptions opts;
    opts.dt = 1e-3;
    opts.grasp_checks = false;
    HandObjectState s = setup.state;
    for (int k = 0; k < 5; ++k) {
      s = step(setup.hand, cfg.object, s, VectorXd::Zero(m), none, opts);
    }
    CHECK((s.q - setup.state.q).norm() < 1e-14);
    CHECK((s.object_pose.position - setup.state.object_pose.position).norm() < 1e-14);
    CHECK(s.t == doctest::Approx(5e-3));
  }
  SUBCASE("constraint residual stays at solver precision while moving") {
    StepOptions opts;
    opts.dt = 1e-4;
    opts.grasp_checks = false;
    DisturbanceModel dist = cfg.disturbances;
    dist.gravity = Vec3(0, 0, -0.3);
    HandObjectState s = setup.state;
    double max_res = 0.0, max_gap = 0.0;
    for (int k = 0; k < 400; ++k) {
      s = step(setup.hand, cfg.object, s, VectorXd::Zero(m), dist, opts);
      const auto gk = eval_grasp(setup.hand, cfg.object.shape, s.object_pose, s.q, 1e-2);
      max_res = std::max(max_res, (gk.J_h * s.qdot - gk.G.transpose() * s.xdot_o).norm());
      for (const auto& c : gk.contacts) max_gap = std::max(max_gap, std::abs(c.gap));
    }
    CHECK(max_res < 1e-10);
    CHECK(max_gap < 1e-7);
  }
  SUBCASE("order of accuracy is fourth order") {
    DisturbanceModel dist = cfg.disturbances;
    dist.gravity = Vec3(0, 0, -0.5);
    auto integrate = [&](double dt, double T) {
      StepOptions opts;
      opts.dt = dt;
      opts.grasp_checks = false;
      HandObjectState s = setup.state;
      const int steps = int(std::llround(T / dt));
      for (int k = 0; k < steps; ++k) {
        s = step(setup.hand, cfg.object, s, VectorXd::Zero(m), dist, opts);
      }
      Eigen::VectorXd out(6 + m);
      out << s.object_pose.position, s.xdot_o.head<3>(), s.q;
      return out;
    };
    const double T = 0.02;
    const auto a = integrate(4e-4, T);
    const auto b = integrate(2e-4, T);
    const auto c = integrate(1e-4, T);
    const double e1 = (a - b).norm();
    const double e2 = (b - c).norm();
    REQUIRE(e2 > 0.0);
    const double ratio = e1 / e2;
    CHECK(ratio > 8.0);   // fourth order gives ~16
    CHECK(ratio < 40.0);
  }
  SUBCASE("losing the squeeze is detected as grasp failure") {
    StepOptions opts;
    opts.dt = 1e-4;
    opts.grasp_checks = true;
    DisturbanceModel none;
    // tension instead of squeeze: normal force goes non-positive
    const auto gk = eval_grasp(setup.hand, cfg.object.shape, setup.state.object_pose,
                               setup.state.q, 1e-2);
    const auto pts = kinematics::tracked_points(setup.hand, setup.state.q);
    Vec3 p_a = Vec3::Zero();
    for (const auto& p : pts) p_a += p;
    p_a /= 3.0;
    VectorXd pull(9);
    for (int i = 0; i < 3; ++i) pull.segment<3>(3 * i) = -5.0 * (p_a - pts[i]);
    const VectorXd u = gk.J_h.transpose() * pull;
    HandObjectState s = setup.state;
    CHECK_THROWS_AS(
        [&] {
          for (int k = 0; k < 50; ++k) {
            s = step(setup.hand, cfg.object, s, u, none, opts);
          }
        }(),
        GraspFailure);
  }
}

TEST_CASE("disturbance model") {
  const auto cfg = demo_cfg("proposed_m020");
  SUBCASE("table defaults") {
    const Vec6 w = cfg.disturbances.external_wrench(0.0, 0.2);
    Vec6 expected;
    expected << 0, 0, -0.2 * 9.81, 0, 0, 0;
    CHECK((w - expected).norm() < 1e-12);
    CHECK(cfg.disturbances.joint_viscous == doctest::Approx(0.001));
  }
  SUBCASE("viscous torque opposes motion") {
    VectorXd qdot = VectorXd::Ones(cfg.hand.joint_count());
    const VectorXd tau =
        cfg.disturbances.joint_torque(cfg.hand, VectorXd::Zero(cfg.hand.joint_count()), qdot);
    CHECK((tau + 0.001 * qdot).norm() < 1e-15);
  }
  SUBCASE("hand gravity torque matches the potential gradient") {
    DisturbanceModel dist = cfg.disturbances;
    dist.hand_gravity = true;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd q(cfg.hand.joint_count());
      for (int i = 0; i < q.size(); ++i) q[i] = 0.8 * g(rng);
      const VectorXd tau = hand_gravity_torque(cfg.hand, q, dist.gravity);
      const double h = 1e-6;
      for (int k = 0; k < q.size(); ++k) {
        VectorXd qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const double dU = (hand_potential_energy(cfg.hand, qp, dist.gravity) -
                           hand_potential_energy(cfg.hand, qm, dist.gravity)) /
                          (2 * h);
        // generalized gravity force is minus the potential gradient
        worst = std::max(worst, std::abs(tau[k] + dU));
      }
    }
    CHECK(worst < 1e-6);
  }
}
