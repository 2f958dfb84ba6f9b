// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Camera placement inside a local window: rejection sampling of training
// views, terrain-aware orbits, and sliding-window binding along trajectories.
#pragma once

#include <array>
#include <functional>
#include <optional>

#include "core/camera.hpp"
#include "core/renderfield.hpp"
#include "core/window.hpp"

namespace bevscape {

struct RejectionPolicy {
  int probe_size = 32;
  double tau_depth = 0.0;     // voxel units
  double tau_entropy = 0.7;   // nats
  int max_attempts = 100;
  double fov_y = 1.0471975511965976;

  // tau_depth = 0.1 * n_w.
  static RejectionPolicy defaults(int n_w);
  void validate() const;
};

using ProbeRenderer = std::function<FrameBuffers(const CameraPose&, const Intrinsics&)>;

// Exact geometry render: an opaque surface with one-hot labels at the first
// occupied voxel; misses keep residual 1 and depth at the window exit.
FrameBuffers geometric_probe(const LocalVolume& vol, const CameraPose& pose, const Intrinsics& intr);

struct PoseSample {
  CameraPose pose;
  double mean_depth = 0.0;
  double entropy = 0.0;
  bool accepted = false;
  int attempts = 0;
};

double mean_depth(const FrameBuffers& fb);

PoseSample sample_pose(const LocalVolume& vol, Rng& rng, const RejectionPolicy& policy,
                       const ProbeRenderer& probe = {});

// Orbit shaped like the evaluation circle but lifted above the tallest column
// so the camera never starts inside terrain; looks at the surface under the
// window center.
CircleSpec orbit_above_terrain(const LocalVolume& vol);

// Keeps a window bound to a moving camera. The window is re-cropped, centered
// on the camera, whenever the camera leaves the central half of the current
// window.
class WindowBinder {
 public:
  WindowBinder(const World& world, int n_w, int h_w);

  // Returns true when the window was rebuilt for this position.
  bool bind(const Vec3& camera_world);
  const LocalVolume& volume() const { return *volume_; }

  // Converts between world voxel coordinates and current window coordinates.
  Vec3 to_window(const Vec3& p_world) const;
  CameraPose to_window(const CameraPose& pose_world) const;

 private:
  const World* world_;
  int n_w_;
  int h_w_;
  std::optional<LocalVolume> volume_;
};

}  // namespace bevscape
