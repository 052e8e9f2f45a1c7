#include "swarmform/controller.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "swarmform/error.hpp"

namespace swarmform {

Vec3 nominal_velocity(const ControlInput& in) {
  Vec3 u = Vec3::Zero();
  for (const auto& [id, rel] : in.neighborRel) {
    auto it = in.gains.find(id);
    if (it == in.gains.end()) {
      throw PreconditionError("agent " + std::to_string(in.selfId + 1) + " has no gain for neighbor " +
                              std::to_string(id + 1));
    }
    u += it->second.apply(rel);
  }
  return u;
}

bool is_safe_direction(const ControlInput& in, const Vec3& v) {
  const double r2 = in.avoidance.activationRadius * in.avoidance.activationRadius;
  for (const auto& [id, rel] : in.allRel) {
    if (id == in.selfId) continue;
    if (rel.squaredNorm() < r2 && v.dot(rel) > 0.0) return false;
  }
  return true;
}

ControlOutput avoid_collisions(const ControlInput& in, const Vec3& nominal) {
  ControlOutput out;
  if (!in.avoidance.enabled) {
    out.velocity = nominal;
    return out;
  }
  Vec3 v = nominal;
  const double speed = v.norm();
  if (speed > in.avoidance.maxSpeed) v *= in.avoidance.maxSpeed / speed;

  const double stop2 = in.avoidance.stopThreshold * in.avoidance.stopThreshold;
  bool tooClose = false;
  for (const auto& [id, rel] : in.allRel)
    if (id != in.selfId && rel.squaredNorm() < stop2) tooClose = true;

  if (!tooClose) {
    if (is_safe_direction(in, v)) {
      out.velocity = v;
      return out;
    }
    constexpr double deg = std::numbers::pi / 180.0;
    for (int step = 5; step <= 85; step += 5) {
      for (int sign : {1, -1}) {
        const double angle = sign * step * deg;
        const Vec3 w = rotate_z(v, angle);
        if (is_safe_direction(in, w)) {
          out.velocity = w;
          out.appliedRotation = angle;
          return out;
        }
      }
    }
  }
  out.velocity = Vec3::Zero();
  out.appliedScale = 0.0;
  out.halted = true;
  return out;
}

ControlOutput compute_control(const ControlInput& in) { return avoid_collisions(in, nominal_velocity(in)); }

}  // namespace swarmform
