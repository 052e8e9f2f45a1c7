#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace swarmform {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Vertex index of the formation graph and agent index of the swarm. Both are
// 0-based in code; files and logs print them 1-based.
using PointIndex = std::size_t;
using AgentId = std::size_t;

// Rotation about the world (and body) z-axis.
Mat3 rot_z(double angle);
Vec3 rotate_z(const Vec3& v, double angle);

// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

// Ground-truth pose of a vehicle. Roll and pitch are not modeled: every body
// z-axis is parallel to world z.
class Pose {
 public:
  Pose() = default;
  Pose(const Vec3& position, double yaw) : position_(position), yaw_(wrap_angle(yaw)) {}

  const Vec3& position() const { return position_; }
  double yaw() const { return yaw_; }

  void set_position(const Vec3& p) { position_ = p; }
  void set_yaw(double yaw) { yaw_ = wrap_angle(yaw); }

 private:
  Vec3 position_ = Vec3::Zero();
  double yaw_ = 0.0;
};

}  // namespace swarmform
