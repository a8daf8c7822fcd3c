#include "inhand/hand_model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "inhand/errors.hpp"

namespace inhand::kinematics {

using nlohmann::json;

namespace {

Vec3 vec3_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing field");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ConfigError(path + "." + key, "expected [x, y, z]");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

double num_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing field");
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

Mat3 mat3_field(const json& j, const std::string& key, const std::string& path) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ConfigError(path + "." + key, "expected 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!a[r].is_array() || a[r].size() != 3)
      throw ConfigError(path + "." + key, "expected 3x3 matrix");
    for (int c = 0; c < 3; ++c) m(r, c) = a[r][c].get<double>();
  }
  return m;
}

}  // namespace

void FingerModel::validate(const std::string& path) const {
  if (joints.empty()) throw ConfigError(path + ".joints", "finger needs at least one joint");
  for (size_t k = 0; k < joints.size(); ++k) {
    if (std::abs(joints[k].axis.norm() - 1.0) > 1e-9)
      throw ConfigError(path + ".joints[" + std::to_string(k) + "].axis", "axis must be unit length");
  }
  if (links.empty()) throw ConfigError(path + ".links", "finger needs at least one link");
  for (size_t l = 0; l < links.size(); ++l) {
    const auto lp = path + ".links[" + std::to_string(l) + "]";
    const auto& link = links[l];
    if (link.body < 1 || link.body > dof()) throw ConfigError(lp + ".body", "body index out of range");
    if (link.mass <= 0.0) throw ConfigError(lp + ".mass", "mass must be positive");
    if (link.length() <= 0.0) throw ConfigError(lp, "link has zero length");
    if (link.width <= 0.0 || link.depth <= 0.0) throw ConfigError(lp, "width/depth must be positive");
  }
  if (fingertip_radius <= 0.0) throw ConfigError(path + ".fingertip.radius", "radius must be positive");
  if (!base_pose.valid(1e-9)) throw ConfigError(path + ".base_rotation", "not a proper rotation");
}

int HandModel::joint_count() const {
  int m = 0;
  for (const auto& f : fingers) m += f.dof();
  return m;
}

int HandModel::joint_offset(int finger) const {
  int off = 0;
  for (int i = 0; i < finger; ++i) off += fingers[i].dof();
  return off;
}

VectorXd HandModel::finger_q(int finger, const VectorXd& q) const {
  return q.segment(joint_offset(finger), fingers[finger].dof());
}

void HandModel::validate() const {
  if (contact_count() <= 2)
    throw ConfigError("fingers", "a grasp needs more than two fingers");
  for (size_t i = 0; i < fingers.size(); ++i) {
    fingers[i].validate("fingers[" + std::to_string(i) + "]");
  }
}

HandModel load_hand(const json& j) {
  HandModel hand;
  hand.name = j.value("name", "hand");
  if (!j.contains("fingers") || !j.at("fingers").is_array())
    throw ConfigError("fingers", "missing finger array");
  int idx = 0;
  for (const auto& fj : j.at("fingers")) {
    const std::string path = "fingers[" + std::to_string(idx) + "]";
    FingerModel f;
    f.name = fj.value("name", "finger" + std::to_string(idx));
    f.base_pose.position = vec3_field(fj, "base_position", path);
    if (fj.contains("base_rotation")) f.base_pose.rotation = mat3_field(fj, "base_rotation", path);
    if (!fj.contains("joints") || !fj.at("joints").is_array())
      throw ConfigError(path + ".joints", "missing joint array");
    for (const auto& jj : fj.at("joints")) {
      Joint joint;
      joint.axis = vec3_field(jj, "axis", path + ".joints[]");
      joint.origin = vec3_field(jj, "origin", path + ".joints[]");
      f.joints.push_back(joint);
    }
    if (!fj.contains("links") || !fj.at("links").is_array())
      throw ConfigError(path + ".links", "missing link array");
    for (const auto& lj : fj.at("links")) {
      LinkSegment link;
      link.body = lj.value("body", 1);
      link.start = vec3_field(lj, "start", path + ".links[]");
      link.end = vec3_field(lj, "end", path + ".links[]");
      link.width = num_field(lj, "width", path + ".links[]");
      link.depth = num_field(lj, "depth", path + ".links[]");
      link.mass = num_field(lj, "mass", path + ".links[]");
      f.links.push_back(link);
    }
    if (!fj.contains("fingertip")) throw ConfigError(path + ".fingertip", "missing field");
    f.fingertip_center0 = vec3_field(fj.at("fingertip"), "center", path + ".fingertip");
    f.fingertip_radius = num_field(fj.at("fingertip"), "radius", path + ".fingertip");
    if (fj.contains("p_ft_offset")) f.p_ft_offset0 = vec3_field(fj, "p_ft_offset", path);
    if (fj.contains("ik_seed")) {
      const auto& s = fj.at("ik_seed");
      f.ik_seed.resize(s.size());
      for (size_t k = 0; k < s.size(); ++k) f.ik_seed[k] = s[k].get<double>();
    }
    hand.fingers.push_back(std::move(f));
    ++idx;
  }
  hand.validate();
  return hand;
}

HandModel load_hand_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open hand file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }
  return load_hand(j);
}

json hand_schema() {
  return json{
      {"version", 1},
      {"name", "string"},
      {"fingers",
       json::array(
           {json{{"name", "string"},
                 {"base_position", "[x, y, z] m, palm frame"},
                 {"base_rotation", "3x3 row-major rotation, optional (identity)"},
                 {"joints", json::array({json{{"axis", "[x, y, z] unit, zero-config base frame"},
                                              {"origin", "[x, y, z] m, zero-config base frame"}}})},
                 {"links",
                  json::array({json{{"body", "1-based body index (moves with joints 1..body)"},
                                    {"start", "[x, y, z] m, zero-config"},
                                    {"end", "[x, y, z] m, zero-config"},
                                    {"width", "m"},
                                    {"depth", "m"},
                                    {"mass", "kg"}}})},
                 {"fingertip", json{{"center", "[x, y, z] m, zero-config"}, {"radius", "m"}}},
                 {"p_ft_offset", "[x, y, z] m tracked-point offset, optional (zero)"},
                 {"ik_seed", "[q...] rad, optional"}}})}};
}

}  // namespace inhand::kinematics
