#pragma once

#include <stdexcept>
#include <string>

namespace inhand {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
  std::string field_path;
  ConfigError(const std::string& path, const std::string& what)
      : Error("config error at '" + path + "': " + what), field_path(path) {}
};

// Raised by contact maintenance and the simulation loop. `time` is the
// simulation time of the event when known, otherwise negative.
struct GraspError : Error {
  double time = -1.0;
  int finger = -1;
  GraspError(const std::string& what, double t = -1.0, int f = -1)
      : Error(what), time(t), finger(f) {}
};

struct ContactLost : GraspError {
  double gap = 0.0;
  ContactLost(double gap_, double t = -1.0, int f = -1)
      : GraspError("contact lost (gap " + std::to_string(gap_) + " m)", t, f),
        gap(gap_) {}
};

struct EdgeContact : GraspError {
  explicit EdgeContact(double t = -1.0, int f = -1)
      : GraspError("contact point reached a surface edge", t, f) {}
};

struct GraspFailure : GraspError {
  explicit GraspFailure(const std::string& why, double t = -1.0, int f = -1)
      : GraspError("grasp failure: " + why, t, f) {}
};

struct SingularHand : Error {
  explicit SingularHand(const std::string& what = "hand Jacobian is singular")
      : Error(what) {}
};

struct DegenerateFrame : Error {
  explicit DegenerateFrame(const std::string& what = "virtual frame is degenerate")
      : Error(what) {}
};

struct OrientationSingularity : Error {
  explicit OrientationSingularity(
      const std::string& what = "orientation parameterization is singular")
      : Error(what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what = "matrix is rank deficient")
      : Error(what) {}
};

struct NonPositiveEpsilon : Error {
  NonPositiveEpsilon() : Error("epsilon must be positive") {}
};

struct EmptyLog : Error {
  EmptyLog() : Error("log contains no rows") {}
};

}  // namespace inhand
