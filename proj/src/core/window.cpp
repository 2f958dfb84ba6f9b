// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/window.hpp"

#include <algorithm>
#include <cmath>

namespace bevscape {

SceneWindow window_at(const World& world, std::array<int, 2> origin, int n_w, int h_w) {
  const int n = world.n();
  require(n_w >= 1 && h_w >= 2, "window dimensions must be positive");
  if (n_w > n) fail(ErrorCode::invalid_argument, "window side exceeds world side");
  require(origin[0] >= 0 && origin[1] >= 0 && origin[0] + n_w <= n && origin[1] + n_w <= n,
          "window origin outside world bounds");
  SceneWindow w;
  w.origin = origin;
  w.n_w = n_w;
  w.h_w = h_w;
  w.world_n = n;
  w.heights = Grid2<double>(n_w);
  w.labels = Grid2<Label>(n_w);
  for (int i = 0; i < n_w; ++i) {
    for (int j = 0; j < n_w; ++j) {
      w.heights.at(i, j) = world.height.heights.at(origin[0] + i, origin[1] + j);
      w.labels.at(i, j) = world.semantic.labels.at(origin[0] + i, origin[1] + j);
    }
  }
  return w;
}

SceneWindow crop_window(const World& world, std::array<double, 2> center_xy, int n_w, int h_w) {
  const int n = world.n();
  if (n_w > n) fail(ErrorCode::invalid_argument, "window side exceeds world side");
  std::array<int, 2> origin{};
  for (int a = 0; a < 2; ++a) {
    const double c = std::floor(center_xy[a] + 0.5) - n_w / 2;
    origin[a] = static_cast<int>(std::clamp(c, 0.0, static_cast<double>(n - n_w)));
  }
  return window_at(world, origin, n_w, h_w);
}

int sea_level_index(int h_w) { return static_cast<int>(std::lround(0.5 * (h_w - 1))); }

LocalVolume build_volume(SceneWindow window) {
  const int n_w = window.n_w;
  const int h_w = window.h_w;
  LocalVolume vol;
  vol.surface_index = Grid2<int>(n_w);
  vol.column_label = Grid2<Label>(n_w);
  const int sea = sea_level_index(h_w);
  for (std::size_t p = 0; p < window.heights.size(); ++p) {
    const double h = window.heights.data[p];
    int s = static_cast<int>(std::lround((h + 1.0) * 0.5 * (h_w - 1)));
    s = std::clamp(s, 0, h_w - 1);
    Label l = window.labels.data[p];
    if (h < 0.0) {
      s = std::max(s, sea);
      l = Label::water;
    }
    vol.surface_index.data[p] = s;
    vol.column_label.data[p] = l;
  }
  vol.window = std::move(window);
  return vol;
}

VoxelQuery query_voxel(const LocalVolume& vol, const Vec3& p) {
  VoxelQuery q;
  q.height_fraction = std::clamp(p.z / vol.h_w(), 0.0, 1.0);
  if (!(p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0)) return q;
  const double fx = std::floor(p.x), fy = std::floor(p.y), fz = std::floor(p.z);
  if (fx >= vol.n_w() || fy >= vol.n_w() || fz >= vol.h_w()) return q;
  const int i = static_cast<int>(fx), j = static_cast<int>(fy), k = static_cast<int>(fz);
  if (k <= vol.surface_index.at(i, j)) {
    q.occupied = true;
    q.label = vol.column_label.at(i, j);
  }
  return q;
}

Vec3 to_global(int world_n, const SceneWindow& window, const Vec3& p_window) {
  const double n = world_n;
  return {(window.origin[0] + p_window.x) / n, (window.origin[1] + p_window.y) / n, p_window.z / window.h_w};
}

}  // namespace bevscape
