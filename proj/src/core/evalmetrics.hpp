// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "core/camera.hpp"
#include "core/renderfield.hpp"
#include "core/window.hpp"

namespace bevscape {

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0),
                           valid(static_cast<std::size_t>(w) * h, 0) {}
  std::size_t pixels() const { return values.size(); }
};

// Scale-invariant depth error: both maps are normalized to zero mean and unit
// variance over jointly valid pixels, then compared by mean squared difference.
double depth_error(const DepthMap& pred, const DepthMap& ref);

// Rendered depth; pixels whose residual transmittance exceeds max_residual
// are treated as sky.
DepthMap depth_from_frame(const FrameBuffers& fb, double max_residual = 0.5);

struct SurfaceHit {
  bool hit = false;
  double t = 0.0;
  Label label = Label::sky;
  double t_exit = 0.0;  // where the ray leaves the window box (0 when missed)
};

// Amanatides-Woo traversal; t is the ray parameter where the first occupied
// voxel is entered (0 when the origin is already inside one).
SurfaceHit trace_surface(const LocalVolume& vol, const Ray& ray);
DepthMap surface_depth(const LocalVolume& vol, const CameraPose& pose, const Intrinsics& intr);

struct Reprojection {
  double error = 0.0;     // mean absolute color difference
  double fraction = 0.0;  // share of valid pixels of A compared in B
};

// Warps A's valid pixels into B and compares colors. With visibility_test,
// points lying behind B's rendered depth (occluded from B) are skipped, so
// only surfaces seen by both views are compared.
Reprojection reproject_consistency(const DepthMap& depth_a, const FrameBuffers& rgb_a, const CameraPose& pose_a,
                                   const FrameBuffers& rgb_b, const CameraPose& pose_b, const Intrinsics& intr,
                                   bool visibility_test = true);

// Shannon entropy (nats) of the frame-mean label distribution, residual
// transmittance counted as sky.
double label_entropy(const FrameBuffers& fb);

}  // namespace bevscape
