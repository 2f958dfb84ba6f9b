// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/camera.hpp"

#include <cmath>
#include <numbers>

namespace bevscape {

void Intrinsics::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::invalid_argument, "image size must be positive");
  require(fov_y > 0.0 && fov_y < std::numbers::pi, "field of view must lie in (0, pi)");
}

double Intrinsics::focal() const { return 0.5 * height / std::tan(0.5 * fov_y); }

CameraPose look_at(const Vec3& position, const Vec3& target, const Vec3& up) {
  const Vec3 view = target - position;
  const double len = norm(view);
  require(len > 0.0 && std::isfinite(len), "look_at target coincides with the position");
  const Vec3 f = view * (1.0 / len);
  const Vec3 side = cross(f, up);
  const double side_len = norm(side);
  require(side_len > 1e-12 * norm(up), "look_at up vector is parallel to the view direction");
  const Vec3 r = side * (1.0 / side_len);
  const Vec3 u = cross(r, f);
  CameraPose pose;
  pose.position = position;
  pose.rotation = {r, u, -f};
  return pose;
}

Ray cast_ray(const CameraPose& pose, const Intrinsics& intr, double px, double py) {
  const double t = std::tan(0.5 * intr.fov_y);
  const double aspect = static_cast<double>(intr.width) / intr.height;
  const double nx = (2.0 * px / intr.width - 1.0) * t * aspect;
  const double ny = (1.0 - 2.0 * py / intr.height) * t;
  return {pose.position, normalize(pose.to_world(Vec3{nx, ny, -1.0}))};
}

Ray cast_pixel_ray(const CameraPose& pose, const Intrinsics& intr, int px, int py) {
  if (px < 0 || py < 0 || px >= intr.width || py >= intr.height)
    fail(ErrorCode::invalid_argument, "pixel outside the image");
  return cast_ray(pose, intr, px + 0.5, py + 0.5);
}

bool project(const CameraPose& pose, const Intrinsics& intr, const Vec3& p, double& px, double& py) {
  const Vec3 c = pose.to_camera(p - pose.position);
  if (c.z >= 0.0) return false;
  const double t = std::tan(0.5 * intr.fov_y);
  const double aspect = static_cast<double>(intr.width) / intr.height;
  const double nx = c.x / (-c.z) / (t * aspect);
  const double ny = c.y / (-c.z) / t;
  px = 0.5 * (nx + 1.0) * intr.width;
  py = 0.5 * (1.0 - ny) * intr.height;
  return true;
}

CircleSpec CircleSpec::evaluation(int n_w, int h_w) {
  CircleSpec s;
  s.center_x = 0.5 * n_w;
  s.center_y = 0.5 * n_w;
  s.radius = 0.4 * n_w;
  s.altitude = 0.2 * h_w;
  s.target = Vec3{0.5 * n_w, 0.5 * n_w, 0.5 * h_w};
  return s;
}

std::vector<CameraPose> circle_trajectory(int n_frames, const CircleSpec& spec) {
  require(n_frames >= 1, "trajectory needs at least one frame");
  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(n_frames));
  for (int k = 0; k < n_frames; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_frames;
    const Vec3 pos{spec.center_x + spec.radius * std::cos(angle), spec.center_y + spec.radius * std::sin(angle),
                   spec.altitude};
    poses.push_back(look_at(pos, spec.target));
  }
  return poses;
}

std::vector<CameraPose> circle_trajectory(int n_frames, int n_w, int h_w) {
  return circle_trajectory(n_frames, CircleSpec::evaluation(n_w, h_w));
}

}  // namespace bevscape
