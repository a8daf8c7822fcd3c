#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "inhand/errors.hpp"
#include "inhand/kinematics.hpp"
#include "inhand/scenario.hpp"

using namespace inhand;
using namespace inhand::kinematics;

namespace {

FingerModel single_revolute_z() {
  FingerModel f;
  f.name = "probe";
  f.joints.push_back({Vec3::UnitZ(), Vec3::Zero()});
  LinkSegment link;
  link.body = 1;
  link.start = Vec3::Zero();
  link.end = Vec3(1, 0, 0);
  link.width = 0.02;
  link.depth = 0.02;
  link.mass = 0.1;
  f.links.push_back(link);
  f.fingertip_center0 = Vec3(1, 0, 0);
  return f;
}

FingerModel planar_two_link(double L1, double L2) {
  FingerModel f;
  f.name = "planar";
  f.joints.push_back({Vec3::UnitZ(), Vec3::Zero()});
  f.joints.push_back({Vec3::UnitZ(), Vec3(L1, 0, 0)});
  LinkSegment a;
  a.body = 1;
  a.start = Vec3::Zero();
  a.end = Vec3(L1, 0, 0);
  a.width = a.depth = 0.02;
  a.mass = 0.1;
  LinkSegment b = a;
  b.body = 2;
  b.start = Vec3(L1, 0, 0);
  b.end = Vec3(L1 + L2, 0, 0);
  f.links = {a, b};
  f.fingertip_center0 = Vec3(L1 + L2, 0, 0);
  return f;
}

HandModel demo_hand() {
  return load_hand(harness::demo_hand_json());
}

}  // namespace

TEST_CASE("spatial jacobian of elementary chains") {
  SUBCASE("single revolute joint about z") {
    const FingerModel f = single_revolute_z();
    const auto J = spatial_jacobian(f, VectorXd::Zero(1));
    Vec6 expected;
    expected << 0, 1, 0, 0, 0, 1;
    CHECK((J.col(0) - expected).norm() < 1e-12);
  }
  SUBCASE("planar two-link at zero configuration") {
    const FingerModel f = planar_two_link(0.6, 0.4);
    const auto J = spatial_jacobian(f, VectorXd::Zero(2));
    CHECK(J(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(J(1, 0) == doctest::Approx(1.0));
    CHECK(J(1, 1) == doctest::Approx(0.4));
    CHECK(J(2, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(J(2, 1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("randomized chain matches central differences") {
    const HandModel hand = demo_hand();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (const auto& finger : hand.fingers) {
      for (int trial = 0; trial < 25; ++trial) {
        VectorXd q(finger.dof());
        for (int i = 0; i < q.size(); ++i) q[i] = 0.7 * g(rng);
        const auto J = spatial_jacobian(finger, q);
        const double h = 1e-6;
        for (int k = 0; k < finger.dof(); ++k) {
          VectorXd qp = q, qm = q;
          qp[k] += h;
          qm[k] -= h;
          const Vec3 fd = (finger_fk(finger, qp).tip_center - finger_fk(finger, qm).tip_center) /
                          (2 * h);
          worst = std::max(worst, (fd - Vec3(J.col(k).head<3>())).norm());
        }
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("hand jacobian offset handling") {
  SUBCASE("pure rotation column with unit offset") {
    Eigen::Matrix<double, 6, 1> Js;
    Js << 0, 0, 0, 0, 0, 1;
    const MatrixXd Jh = hand_jacobian(Js, Vec3(1, 0, 0));
    CHECK((Jh.col(0) - Vec3(0, 1, 0)).norm() < 1e-15);
  }
  SUBCASE("zero offset keeps translational rows") {
    Eigen::Matrix<double, 6, 2> Js;
    Js << 1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    const MatrixXd Jh = hand_jacobian(Js, Vec3::Zero());
    CHECK((Jh - Js.topRows(3)).norm() < 1e-15);
  }
  SUBCASE("contact velocity matches finite difference of the contact point") {
    // velocity of the fingertip material point at a fixed body offset
    const HandModel hand = demo_hand();
    const auto& finger = hand.fingers[0];
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd q(finger.dof());
      for (int i = 0; i < q.size(); ++i) q[i] = 0.5 * g(rng);
      const Vec3 offset_body(0.003 * g(rng), 0.003 * g(rng), 0.003 * g(rng));
      VectorXd qdot(finger.dof());
      for (int i = 0; i < q.size(); ++i) qdot[i] = g(rng);

      const auto fk = finger_fk(finger, q);
      const Vec3 point0 = finger.fingertip_center0 + offset_body;
      const Vec3 offset_world = fk.tip_body()(point0) - fk.tip_center;
      const MatrixXd Jh = hand_jacobian(spatial_jacobian(finger, q), offset_world);

      const double h = 1e-6;
      const auto fkp = finger_fk(finger, q + h * qdot);
      const auto fkm = finger_fk(finger, q - h * qdot);
      const Vec3 fd = (fkp.tip_body()(point0) - fkm.tip_body()(point0)) / (2 * h);
      worst = std::max(worst, (Vec3(Jh * qdot) - fd).norm());
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("grasp maps") {
  SUBCASE("torque equals lever cross force") {
    const MatrixXd G = grasp_map({Vec3(0, 0, 1)});
    Vec3 f(1, 0, 0);
    const Vec6 w = G * f;
    CHECK((w.head<3>() - f).norm() < 1e-15);
    CHECK((w.tail<3>() - Vec3(0, 1, 0)).norm() < 1e-15);
  }
  SUBCASE("zero lever gives zero torque rows") {
    const MatrixXd G = grasp_map({Vec3::Zero()});
    CHECK(G.block<3, 3>(3, 0).norm() == 0.0);
  }
  SUBCASE("full rank for non-collinear triples") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Vec3> p(3);
      for (auto& v : p) v = Vec3(g(rng), g(rng), g(rng)) * 0.05;
      if ((p[2] - p[0]).cross(p[1] - p[0]).norm() < 1e-5) continue;
      Eigen::JacobiSVD<MatrixXd> svd(grasp_map(p));
      CHECK(svd.singularValues().minCoeff() > 1e-10);
    }
  }
  SUBCASE("approximate map degenerates to pure force rows at the centroid") {
    const std::vector<Vec3> pts(3, Vec3(0.1, 0.2, 0.3));
    const MatrixXd Ghat = approx_grasp_map(pts, Vec3(0.1, 0.2, 0.3));
    CHECK(Ghat.bottomRows(3).norm() == 0.0);
  }
  SUBCASE("difference to the true map has the rank-one moment structure") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vec3> p_c(3);
      for (auto& v : p_c) v = Vec3(g(rng), g(rng), g(rng)) * 0.05;
      Vec3 p_a = (p_c[0] + p_c[1] + p_c[2]) / 3.0;
      const Vec3 p_o = p_a + Vec3(g(rng), g(rng), g(rng)) * 0.02;
      std::vector<Vec3> p_oc;
      for (const auto& v : p_c) p_oc.push_back(v - p_o);
      const MatrixXd delta = grasp_map(p_oc) - approx_grasp_map(p_c, p_a);
      CHECK(delta.topRows(3).norm() < 1e-12);
      // moment blocks are identical rank-one skews of the centroid offset
      const Mat3 expected = skew(p_a - p_o);
      for (int i = 0; i < 3; ++i) {
        CHECK((delta.block<3, 3>(3, 3 * i) - expected).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("virtual frame") {
  SUBCASE("worked triad") {
    const std::vector<Vec3> pts{Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(1, 0, 0)};
    const TaskFrame tf = virtual_frame(pts);
    CHECK((tf.p_a - Vec3(1.0 / 3.0, 0, 0)).norm() < 1e-15);
    CHECK((tf.R_pa.col(1) - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((tf.R_pa.col(2) - Vec3(0, 0, -1)).norm() < 1e-15);
    CHECK((tf.R_pa.col(0) - Vec3(-1, 0, 0)).norm() < 1e-15);
    CHECK((tf.gamma_a - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK(tf.R_pa.determinant() == doctest::Approx(1.0));
  }
  SUBCASE("collinear points raise DegenerateFrame") {
    const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
    CHECK_THROWS_AS(virtual_frame(pts), DegenerateFrame);
  }
  SUBCASE("equivariance under rigid rotations") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vec3> pts(4);
      for (auto& v : pts) v = Vec3(g(rng), g(rng), g(rng));
      if ((pts[2] - pts[0]).cross(pts[1] - pts[0]).norm() < 1e-3) continue;
      const Mat3 Q = rotation_exp(Vec3(g(rng), g(rng), g(rng)));
      std::vector<Vec3> rotated;
      for (const auto& v : pts) rotated.push_back(Q * v);
      const auto a = virtual_frame(pts);
      const auto b = virtual_frame(rotated);
      CHECK((b.p_a - Q * a.p_a).norm() < 1e-12);
      CHECK((b.R_pa - Q * a.R_pa).norm() < 1e-12);
    }
  }
}

TEST_CASE("orientation rate maps") {
  // a frame with a healthy tilt away from both chart singularities
  const std::vector<Vec3> pts{Vec3(0.0177, 0.075, 0.095), Vec3(0.0177, -0.025, 0.095),
                              Vec3(-0.0177, 0.025, 0.0844)};
  const TaskFrame tf = virtual_frame(pts);

  SUBCASE("P has an identity translational block and the block inverse structure") {
    const Mat6 P = p_matrix(tf.R_pa);
    CHECK((P.block<3, 3>(0, 0) - Mat3::Identity()).norm() == 0.0);
    CHECK(P.block<3, 3>(0, 3).norm() == 0.0);
    CHECK(P.block<3, 3>(3, 0).norm() == 0.0);
    const Mat3 S = s_matrix(tf.R_pa);
    const Mat6 Pinv = P.inverse();
    CHECK((Pinv.block<3, 3>(3, 3) - S.inverse()).norm() < 1e-10);
  }
  SUBCASE("omega from S gamma_dot matches the rotation flow") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
      const Vec3 omega(g(rng), g(rng), g(rng));
      const double h = 1e-7;
      const Mat3 Rp = rotation_exp(h * omega) * tf.R_pa;
      const Mat3 Rm = rotation_exp(-h * omega) * tf.R_pa;
      const Vec3 g0 = gamma_from_rotation(tf.R_pa);
      const Vec3 gdot =
          (unwrap_gamma(gamma_from_rotation(Rp), g0) - unwrap_gamma(gamma_from_rotation(Rm), g0)) /
          (2 * h);
      const Mat3 S = s_matrix(tf.R_pa);
      worst = std::max(worst, (S * gdot - omega).norm() / omega.norm());
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("chart singularities are flagged") {
    // triad normal along x: gamma_1 undefined
    Mat3 R1;
    R1.col(0) = Vec3(0, 0, -1);
    R1.col(1) = Vec3(0, 1, 0);
    R1.col(2) = Vec3(1, 0, 0);
    CHECK_THROWS_AS(s_matrix(R1), OrientationSingularity);
    // identity: gamma_2 at its critical value
    CHECK_THROWS_AS(s_matrix(Mat3::Identity()), OrientationSingularity);
  }
}

TEST_CASE("task jacobian and the composite task map") {
  nlohmann::json sj = harness::demo_scenario_json("proposed_m010");
  sj["hand"] = harness::demo_hand_json();
  harness::ScenarioConfig cfg = harness::load_scenario(sj, "");
  const auto setup = harness::setup_initial_state(cfg);
  const VectorXd q0 = setup.state.q;

  SUBCASE("translational rows average the fingertip point jacobians") {
    const MatrixXd dxdq = task_jacobian(setup.hand, q0);
    for (int i = 0; i < setup.hand.contact_count(); ++i) {
      const auto& f = setup.hand.fingers[i];
      const VectorXd qi = setup.hand.finger_q(i, q0);
      const auto fk = finger_fk(f, qi);
      const Vec3 offset = fk.tip_body()(f.fingertip_center0 + f.p_ft_offset0) - fk.tip_center;
      const MatrixXd Jt = hand_jacobian(spatial_jacobian(f, qi), offset);
      CHECK((dxdq.block(0, setup.hand.joint_offset(i), 3, f.dof()) - Jt / 3.0).norm() < 1e-12);
    }
  }
  SUBCASE("frame state rate matches xdot = dxdq qdot") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g(0.0, 1.0);
    const MatrixXd dxdq = task_jacobian(setup.hand, q0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd qdot(q0.size());
      for (int i = 0; i < qdot.size(); ++i) qdot[i] = g(rng);
      const double h = 1e-5;
      auto x_at = [&](double sign) {
        const auto pts = tracked_points(setup.hand, q0 + sign * h * qdot);
        const auto tf = virtual_frame(pts);
        Vec6 x;
        x << tf.p_a, tf.gamma_a;
        return x;
      };
      const Vec6 fd = (x_at(1.0) - x_at(-1.0)) / (2 * h);
      worst = std::max(worst, (fd - Vec6(dxdq * qdot)).norm());
    }
    CHECK(worst < 1e-5);
  }
  SUBCASE("rigid translation of all fingertips moves the centroid only") {
    // directions that translate every tracked point equally leave gamma fixed
    const MatrixXd dxdq = task_jacobian(setup.hand, q0);
    const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape,
                                         setup.state.object_pose, q0, 1e-2);
    for (const Vec3& delta : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
      Vec6 xdot;
      xdot << delta, Vec3::Zero();
      const VectorXd qdot = gk.qdot_from(xdot);
      const Vec6 xrate = dxdq * qdot;
      CHECK((Vec3(xrate.head<3>()) - delta).norm() < 1e-8);
      CHECK(Vec3(xrate.tail<3>()).norm() < 1e-8);
    }
  }
  SUBCASE("task map is consistent and invertible") {
    const auto gk = dynamics::eval_grasp(setup.hand, cfg.object.shape,
                                         setup.state.object_pose, q0, 1e-2);
    const MatrixXd dxdq = task_jacobian(setup.hand, q0);
    const Mat6 Ja = j_a(dxdq, gk.J_h, gk.G);
    CHECK(std::abs(Ja.determinant()) > 1e-12);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vec6 xdot_o;
      for (int i = 0; i < 6; ++i) xdot_o[i] = g(rng);
      const VectorXd qdot = gk.qdot_from(xdot_o);
      CHECK((Vec6(Ja * xdot_o) - Vec6(dxdq * qdot)).norm() < 1e-10);
    }
  }
}

TEST_CASE("finger inverse kinematics") {
  const HandModel hand = demo_hand();
  const auto& f = hand.fingers[0];
  const Vec3 target(0.0277, 0.075, 0.095);
  const VectorXd q = solve_finger_ik(f, target);
  CHECK((finger_fk(f, q).tip_center - target).norm() < 1e-12);
}

TEST_CASE("hand model loading and validation") {
  const auto j = harness::demo_hand_json();
  const HandModel hand = load_hand(j);
  CHECK(hand.contact_count() == 3);
  CHECK(hand.joint_count() == 9);
  CHECK(hand.fingers[0].links[0].mass == doctest::Approx(0.0444));
  CHECK(hand.fingers[2].links[2].mass == doctest::Approx(0.0556));

  auto bad = j;
  bad["fingers"][0]["joints"][0]["axis"] = {2.0, 0.0, 0.0};
  CHECK_THROWS_AS(load_hand(bad), ConfigError);
}
