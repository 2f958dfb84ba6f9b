// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "core/common.hpp"
#include "core/worldgen.hpp"

namespace bevscape {

// N_w x N_w crop of the world bound to a corner in world grid coordinates.
struct SceneWindow {
  std::array<int, 2> origin{0, 0};
  int n_w = 0;
  int h_w = 0;
  int world_n = 0;
  Grid2<double> heights;
  Grid2<Label> labels;
};

// Solid-column voxelization of a window: voxel (i, j, k) is occupied iff
// 0 <= k <= surface_index(i, j).
struct LocalVolume {
  SceneWindow window;
  Grid2<int> surface_index;
  Grid2<Label> column_label;

  int n_w() const { return window.n_w; }
  int h_w() const { return window.h_w; }
};

struct VoxelQuery {
  bool occupied = false;
  Label label = Label::sky;
  double height_fraction = 0.0;
};

SceneWindow crop_window(const World& world, std::array<double, 2> center_xy, int n_w, int h_w);
SceneWindow window_at(const World& world, std::array<int, 2> origin, int n_w, int h_w);

int sea_level_index(int h_w);
LocalVolume build_volume(SceneWindow window);

VoxelQuery query_voxel(const LocalVolume& vol, const Vec3& p);

// Window coordinates (voxel units) to world-normalized coordinates in [0,1]^3.
Vec3 to_global(int world_n, const SceneWindow& window, const Vec3& p_window);

}  // namespace bevscape
