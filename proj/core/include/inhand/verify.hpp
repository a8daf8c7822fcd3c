#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inhand/gfo.hpp"
#include "inhand/scenario.hpp"

namespace inhand::harness {

struct SuiteResult {
  std::string suite;
  bool pass = false;
  std::vector<std::string> lines;        // one per check
  std::vector<std::string> counterexamples;
};

std::vector<std::string> suite_names();

// kinematics | conservation | lemmas | dual_form | qp | all
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 1);

// Brute-force reference for small allocation QPs: enumerates candidate
// active sets, keeps KKT-consistent feasible points, returns the best.
gfo::QPSolution enumerate_qp_oracle(const gfo::QPProblem& prob);

// Random hand-object grasp states reachable from the demo grasp, used by the
// randomized property checks.
struct SampledGrasp {
  kinematics::HandModel hand;  // tracked points anchored at current contacts
  dynamics::HandObjectState state;
  dynamics::ObjectModel object;
};
std::vector<SampledGrasp> sample_grasps(int count, std::uint64_t seed);

// Scenario used by the conservation suite: torque-free demo grasp under a
// reduced gravity field that keeps the swing inside the workspace.
ScenarioConfig conservation_scenario(double gravity_z = -0.3, double horizon = 1.0);

// Proposed-control run that reaches the lemma-4 equilibrium tolerance inside
// a 10 s horizon (stiffer outer gains than the reproduction scenario).
ScenarioConfig converged_scenario();

}  // namespace inhand::harness
