#pragma once

#include "inhand/errors.hpp"
#include "inhand/types.hpp"

namespace inhand::geometry {

struct Pose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();

  static Pose identity() { return Pose{}; }

  Vec3 to_world(const Vec3& local) const { return position + rotation * local; }
  Vec3 to_local(const Vec3& world) const {
    return rotation.transpose() * (world - position);
  }

  // Orthonormality and det(+1), both within tol.
  bool valid(double tol = 1e-12) const;
};

struct Shape {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  double radius = 0.0;          // Sphere
  Vec3 half_extents = Vec3::Zero();  // Box

  static Shape sphere(double r) {
    Shape s;
    s.kind = Kind::Sphere;
    s.radius = r;
    return s;
  }
  static Shape box(const Vec3& he) {
    Shape s;
    s.kind = Kind::Box;
    s.half_extents = he;
    return s;
  }
  bool valid() const;
};

struct SurfacePoint {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();  // outward at `point`
  double signed_distance = 0.0; // negative inside
};

// Closest surface point to `query`. Total function: interior queries project
// to the nearest face (box) or radially (sphere). Box ties resolve to the
// lowest axis index.
SurfacePoint closest_point(const Shape& shape, const Pose& pose, const Vec3& query);

struct ContactGeometry {
  Vec3 p_c = Vec3::Zero();    // contact point, inertial
  Vec3 p_fc = Vec3::Zero();   // fingertip frame origin -> contact, inertial
  Vec3 p_oc = Vec3::Zero();   // object origin -> contact, inertial
  Vec3 normal = Vec3::UnitX();  // object outward normal at the contact
  double gap = 0.0;           // fingertip surface to object surface, signed
};

// Projects the object surface point closest to the fingertip center and
// reports the gap between the two surfaces. Throws ContactLost when the gap
// exceeds `gap_tolerance`.
ContactGeometry update_contact(const Vec3& fingertip_center, double fingertip_radius,
                               const Shape& object_shape, const Pose& object_pose,
                               double gap_tolerance = 1e-4);

// True when a box contact point lies within `edge_tolerance` of a face edge.
// Always false for spheres.
bool near_edge(const Shape& shape, const Pose& pose, const Vec3& surface_point,
               double edge_tolerance = 1e-6);

}  // namespace inhand::geometry
