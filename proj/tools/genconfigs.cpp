// Regenerates the shipped configuration files from the built-in demo
// descriptions. Run from the repository root: build/tools/genconfigs configs
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "inhand/scenario.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "configs";
  std::filesystem::create_directories(dir);

  auto write = [&](const std::string& name, const nlohmann::json& j) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    out << j.dump(2) << "\n";
    std::cout << dir << "/" << name << "\n";
  };

  write("hand_allegro3.json", inhand::harness::demo_hand_json());
  for (const auto& name : inhand::harness::demo_scenario_names()) {
    write(name + ".json", inhand::harness::demo_scenario_json(name));
  }
  return 0;
}
