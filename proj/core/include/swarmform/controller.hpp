#pragma once

#include <map>

#include "swarmform/formation.hpp"
#include "swarmform/geometry.hpp"

namespace swarmform {

struct AvoidanceParams {
  bool enabled = true;
  double activationRadius = 1.2;
  // Any separation below this forces a halt.
  double stopThreshold = 0.6;
  double maxSpeed = 1.0;
};

// Everything is expressed in the agent's own body frame.
struct ControlInput {
  AgentId selfId = 0;
  std::map<AgentId, Vec3> neighborRel;
  std::map<AgentId, Vec3> allRel;
  std::map<AgentId, GainBlock> gains;
  AvoidanceParams avoidance;
};

struct ControlOutput {
  Vec3 velocity = Vec3::Zero();
  double appliedRotation = 0.0;
  double appliedScale = 1.0;
  bool halted = false;
};

// u = sum_j A_ij rel_j. Throws PreconditionError if a neighbor has no gain.
Vec3 nominal_velocity(const ControlInput& in);

// True if v has no closing component toward any agent inside the
// activation radius.
bool is_safe_direction(const ControlInput& in, const Vec3& v);

// Clamp, then rotate about body z by the smallest safe angle in
// 0, +5, -5, +10, ... , -85 degrees; halt if none is safe. With avoidance
// disabled the nominal command passes through untouched.
ControlOutput avoid_collisions(const ControlInput& in, const Vec3& nominal);

ControlOutput compute_control(const ControlInput& in);

}  // namespace swarmform
