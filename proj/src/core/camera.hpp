// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "core/common.hpp"

namespace bevscape {

// Camera-to-window rigid transform. Columns of `rotation` are the camera's
// right, up and backward axes (the camera looks down its local -z).
struct CameraPose {
  Vec3 position;
  std::array<Vec3, 3> rotation{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  Vec3 right() const { return rotation[0]; }
  Vec3 up() const { return rotation[1]; }
  Vec3 forward() const { return -rotation[2]; }
  Vec3 to_world(const Vec3& v) const { return rotation[0] * v.x + rotation[1] * v.y + rotation[2] * v.z; }
  Vec3 to_camera(const Vec3& v) const { return {dot(rotation[0], v), dot(rotation[1], v), dot(rotation[2], v)}; }
};

struct Intrinsics {
  int width = 64;
  int height = 64;
  double fov_y = 1.0471975511965976;  // 60 degrees

  void validate() const;
  double focal() const;  // focal length in pixels
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  Vec3 at(double t) const { return origin + direction * t; }
};

CameraPose look_at(const Vec3& position, const Vec3& target, const Vec3& up = Vec3{0, 0, 1});

Ray cast_ray(const CameraPose& pose, const Intrinsics& intr, double px, double py);
// Ray through the center of pixel (px, py).
Ray cast_pixel_ray(const CameraPose& pose, const Intrinsics& intr, int px, int py);

// Projects a window-space point; returns false when it lies behind the camera.
bool project(const CameraPose& pose, const Intrinsics& intr, const Vec3& p, double& px, double& py);

// Orbit from the evaluation protocol: center (0.5 n_w, 0.5 n_w), radius
// 0.4 n_w, altitude 0.2 h_w, looking at the window center.
struct CircleSpec {
  double center_x = 0, center_y = 0;
  double radius = 0;
  double altitude = 0;
  Vec3 target;

  static CircleSpec evaluation(int n_w, int h_w);
};

std::vector<CameraPose> circle_trajectory(int n_frames, int n_w, int h_w);
std::vector<CameraPose> circle_trajectory(int n_frames, const CircleSpec& spec);

}  // namespace bevscape
