#include "inhand/geometry.hpp"

#include <cmath>

namespace inhand::geometry {

bool Pose::valid(double tol) const {
  const Mat3 should_be_identity = rotation.transpose() * rotation;
  if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

bool Shape::valid() const {
  switch (kind) {
    case Kind::Sphere:
      return radius > 0.0;
    case Kind::Box:
      return (half_extents.array() > 0.0).all();
  }
  return false;
}

namespace {

SurfacePoint closest_point_sphere(double radius, const Pose& pose, const Vec3& query) {
  SurfacePoint sp;
  const Vec3 d = query - pose.position;
  const double dist = d.norm();
  if (dist < 1e-15) {
    sp.normal = Vec3::UnitX();  // center query: fixed direction
  } else {
    sp.normal = d / dist;
  }
  sp.point = pose.position + radius * sp.normal;
  sp.signed_distance = dist - radius;
  return sp;
}

SurfacePoint closest_point_box(const Vec3& he, const Pose& pose, const Vec3& query) {
  SurfacePoint sp;
  const Vec3 q = pose.to_local(query);
  const Vec3 clamped = q.cwiseMax(-he).cwiseMin(he);
  const bool inside = (q.array().abs() < he.array()).all();

  Vec3 local_point;
  Vec3 local_normal;
  if (!inside) {
    local_point = clamped;
    // Outward normal along the dominant violated axis, lowest index wins ties.
    int axis = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double excess = std::abs(q[i]) - he[i];
      if (excess > best + 1e-15) {
        best = excess;
        axis = i;
      }
    }
    local_normal = Vec3::Zero();
    local_normal[axis] = (q[axis] >= 0.0) ? 1.0 : -1.0;
    sp.signed_distance = (q - clamped).norm();
  } else {
    // Interior: project to the nearest face, lowest axis index on ties.
    int axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const double depth = he[i] - std::abs(q[i]);
      if (depth < best - 1e-15) {
        best = depth;
        axis = i;
      }
    }
    local_point = q;
    const double sign = (q[axis] >= 0.0) ? 1.0 : -1.0;
    local_point[axis] = sign * he[axis];
    local_normal = Vec3::Zero();
    local_normal[axis] = sign;
    sp.signed_distance = -best;
  }
  sp.point = pose.to_world(local_point);
  sp.normal = pose.rotation * local_normal;
  return sp;
}

}  // namespace

SurfacePoint closest_point(const Shape& shape, const Pose& pose, const Vec3& query) {
  switch (shape.kind) {
    case Shape::Kind::Sphere:
      return closest_point_sphere(shape.radius, pose, query);
    case Shape::Kind::Box:
      return closest_point_box(shape.half_extents, pose, query);
  }
  return {};
}

ContactGeometry update_contact(const Vec3& fingertip_center, double fingertip_radius,
                               const Shape& object_shape, const Pose& object_pose,
                               double gap_tolerance) {
  const SurfacePoint sp = closest_point(object_shape, object_pose, fingertip_center);
  ContactGeometry cg;
  cg.p_c = sp.point;
  cg.normal = sp.normal;
  cg.gap = sp.signed_distance - fingertip_radius;
  cg.p_fc = cg.p_c - fingertip_center;
  cg.p_oc = cg.p_c - object_pose.position;
  if (cg.gap > gap_tolerance) {
    throw ContactLost(cg.gap);
  }
  return cg;
}

bool near_edge(const Shape& shape, const Pose& pose, const Vec3& surface_point,
               double edge_tolerance) {
  if (shape.kind != Shape::Kind::Box) return false;
  const Vec3 q = pose.to_local(surface_point);
  int on_face = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(std::abs(q[i]) - shape.half_extents[i]) <= edge_tolerance) ++on_face;
  }
  return on_face >= 2;
}

}  // namespace inhand::geometry
