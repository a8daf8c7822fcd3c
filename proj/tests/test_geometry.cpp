#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inhand/geometry.hpp"

using namespace inhand;
using namespace inhand::geometry;

TEST_CASE("closest point on a sphere") {
  const Shape s = Shape::sphere(1.0);
  const Pose pose;

  SUBCASE("outside query projects radially") {
    const auto sp = closest_point(s, pose, Vec3(2, 0, 0));
    CHECK((sp.point - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK((sp.normal - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK(sp.signed_distance == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("interior query is negative distance") {
    const auto sp = closest_point(s, pose, Vec3(0.5, 0, 0));
    CHECK((sp.point - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK(sp.signed_distance == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("surface distance is exact for random outside queries") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const Vec3 q = Vec3(g(rng), g(rng), g(rng)).normalized() * (1.0 + 3.0 * std::abs(g(rng)));
      const auto sp = closest_point(s, pose, q);
      CHECK(std::abs((sp.point - pose.position).norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("closest point on a box") {
  const Shape b = Shape::box(Vec3(1, 1, 1));
  const Pose pose;

  SUBCASE("face projection") {
    const auto sp = closest_point(b, pose, Vec3(0, 0, 2));
    CHECK((sp.point - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK((sp.normal - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(sp.signed_distance == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("interior projects to the nearest face, lowest axis on ties") {
    const auto sp = closest_point(b, pose, Vec3(0.2, 0.2, 0.2));
    CHECK(sp.signed_distance == doctest::Approx(-0.8));
    CHECK((sp.point - Vec3(1, 0.2, 0.2)).norm() < 1e-12);
    CHECK((sp.normal - Vec3(1, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("rotated box") {
    Pose p2;
    p2.rotation = rotation_exp(Vec3(0, 0, M_PI / 2));
    p2.position = Vec3(1, 0, 0);
    const auto sp = closest_point(b, p2, Vec3(1, 0, 3));
    CHECK(sp.signed_distance == doctest::Approx(2.0).epsilon(1e-9));
    CHECK((sp.point - Vec3(1, 0, 1)).norm() < 1e-9);
  }
}

TEST_CASE("closest point idempotence") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  const Shape shapes[] = {Shape::sphere(0.7), Shape::box(Vec3(0.5, 0.3, 0.8))};
  for (const auto& s : shapes) {
    for (int i = 0; i < 100; ++i) {
      const Vec3 q(2.0 * g(rng), 2.0 * g(rng), 2.0 * g(rng));
      const auto sp = closest_point(s, Pose{}, q);
      const auto sp2 = closest_point(s, Pose{}, sp.point);
      CHECK(std::abs(sp2.signed_distance) < 1e-12);
      CHECK((sp2.point - sp.point).norm() < 1e-12);
    }
  }
}

TEST_CASE("contact update") {
  SUBCASE("tangency against a box face") {
    const Shape b = Shape::box(Vec3(1, 1, 1));
    const auto cg = update_contact(Vec3(0, 0, 1.01), 0.01, b, Pose{});
    CHECK((cg.p_c - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(cg.gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((cg.p_fc - Vec3(0, 0, -0.01)).norm() < 1e-12);
    CHECK((cg.p_oc - Vec3(0, 0, 1)).norm() < 1e-12);
  }
  SUBCASE("separation raises ContactLost") {
    const Shape b = Shape::box(Vec3(1, 1, 1));
    CHECK_THROWS_AS(update_contact(Vec3(0, 0, 1.02), 0.01, b, Pose{}, 1e-4), ContactLost);
  }
  SUBCASE("concentric sphere tangency") {
    const Shape s = Shape::sphere(0.0375);
    const auto cg = update_contact(Vec3(0, 0, 0.0475), 0.01, s, Pose{});
    CHECK((cg.p_c - Vec3(0, 0, 0.0375)).norm() < 1e-12);
    CHECK(cg.gap == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("repeated update with unchanged state is identical") {
    const Shape b = Shape::box(Vec3(0.02, 0.1, 0.02));
    Pose pose;
    pose.position = Vec3(0, 0, 0.1);
    const auto a = update_contact(Vec3(0.03, 0.01, 0.1), 0.01, b, pose);
    const auto c = update_contact(Vec3(0.03, 0.01, 0.1), 0.01, b, pose);
    CHECK((a.p_c - c.p_c).norm() == 0.0);
    CHECK(a.gap == c.gap);
    CHECK((a.normal - c.normal).norm() == 0.0);
  }
}

TEST_CASE("pose validity") {
  Pose p;
  CHECK(p.valid());
  p.rotation(0, 0) = 1.0 + 1e-6;
  CHECK_FALSE(p.valid());
}

TEST_CASE("edge detection on boxes") {
  const Shape b = Shape::box(Vec3(1, 1, 1));
  CHECK(geometry::near_edge(b, Pose{}, Vec3(1, 1, 0)));
  CHECK_FALSE(geometry::near_edge(b, Pose{}, Vec3(1, 0.5, 0)));
  CHECK_FALSE(geometry::near_edge(Shape::sphere(1.0), Pose{}, Vec3(1, 0, 0)));
}
