#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "inhand/geometry.hpp"
#include "inhand/types.hpp"

namespace inhand::kinematics {

// All finger geometry is given in the finger base frame at the zero
// configuration. `body` indices are 1-based: body k moves with joints 1..k.
struct Joint {
  Vec3 axis = Vec3::UnitY();
  Vec3 origin = Vec3::Zero();
};

struct LinkSegment {
  int body = 1;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double width = 0.0;
  double depth = 0.0;
  double mass = 0.0;

  double length() const { return (end - start).norm(); }
};

struct FingerModel {
  std::string name;
  geometry::Pose base_pose;
  std::vector<Joint> joints;
  std::vector<LinkSegment> links;
  Vec3 fingertip_center0 = Vec3::Zero();
  double fingertip_radius = 0.01;
  // Offset of the tracked fingertip surface point from the fingertip center,
  // zero-configuration base coordinates. Scenario setup points it at the
  // initial contact.
  Vec3 p_ft_offset0 = Vec3::Zero();
  VectorXd ik_seed;

  int dof() const { return static_cast<int>(joints.size()); }
  void validate(const std::string& path) const;
};

struct HandModel {
  std::string name;
  std::vector<FingerModel> fingers;

  int contact_count() const { return static_cast<int>(fingers.size()); }
  int joint_count() const;
  // Offset of finger i's joints inside the stacked joint vector.
  int joint_offset(int finger) const;
  Eigen::VectorXd finger_q(int finger, const VectorXd& q) const;
  void validate() const;
};

HandModel load_hand(const nlohmann::json& j);
HandModel load_hand_file(const std::string& path);
// Schema of the hand description file, as a JSON document.
nlohmann::json hand_schema();

}  // namespace inhand::kinematics
