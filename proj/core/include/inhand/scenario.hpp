#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "inhand/control.hpp"
#include "inhand/dynamics.hpp"
#include "inhand/hand_model.hpp"

namespace inhand::harness {

struct ContactSpec {
  int finger = 0;
  Vec3 point = Vec3::Zero();  // on the object surface, world frame
};

struct ScenarioConfig {
  std::string name = "scenario";
  kinematics::HandModel hand;
  dynamics::ObjectModel object;
  bool inertia_auto = true;

  std::vector<ContactSpec> initial_contacts;
  VectorXd initial_q;  // used when no contacts are given

  bool controller_enabled = true;
  control::ControllerConfig controller;
  bool mbar_auto = false;  // rebuild M_bar from sampled task inertia

  dynamics::DisturbanceModel disturbances;

  double dt = 1e-4;
  double horizon = 10.0;
  int log_stride = 10;
  double gap_tolerance = 1e-4;
  double constraint_tolerance = 1e-6;
  double invariant_gap = 1e-5;
  bool grasp_checks = true;
  std::uint64_t seed = 0;

  void validate() const;
};

ScenarioConfig load_scenario(const nlohmann::json& j, const std::string& base_dir);
ScenarioConfig load_scenario_file(const std::string& path);
nlohmann::json scenario_schema();
nlohmann::json resolved_json(const ScenarioConfig& cfg);

// Solves the initial grasp: finger IK onto the configured contacts, tracked
// points anchored at those contacts, hand-object state at rest.
struct InitialSetup {
  kinematics::HandModel hand;  // p_ft offsets point at the initial contacts
  dynamics::HandObjectState state;
};
InitialSetup setup_initial_state(const ScenarioConfig& cfg);

// Diagonal upper-bound inertia approximation sampled over a neighborhood of
// the initial state, shrunk until the contraction condition holds on the
// samples.
Mat6 auto_m_bar(const ScenarioConfig& cfg, const InitialSetup& setup, double margin = 1.5);

// Config with gains resolved (auto M_bar applied when requested).
ScenarioConfig resolve_gains(const ScenarioConfig& cfg, const InitialSetup& setup);

// Built-in demo hand and scenarios; the shipped config files mirror these.
nlohmann::json demo_hand_json();
nlohmann::json demo_scenario_json(const std::string& name);
std::vector<std::string> demo_scenario_names();

}  // namespace inhand::harness
