// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "core/window.hpp"
#include "test_support.hpp"

namespace bevscape {
namespace {

using testing::flat_world;
using testing::ramp_world;

TEST(CropWindow, FullWorldAtCenter) {
  const World w = ramp_world(32);
  const SceneWindow win = crop_window(w, {16.0, 16.0}, 32, 16);
  EXPECT_EQ(win.origin, (std::array<int, 2>{0, 0}));
  EXPECT_EQ(win.heights, w.height.heights);
  EXPECT_EQ(win.labels, w.semantic.labels);
}

TEST(CropWindow, ClampsAtCorners) {
  const World w = ramp_world(64);
  EXPECT_EQ(crop_window(w, {0.0, 0.0}, 16, 8).origin, (std::array<int, 2>{0, 0}));
  EXPECT_EQ(crop_window(w, {64.0, 64.0}, 16, 8).origin, (std::array<int, 2>{48, 48}));
  EXPECT_EQ(crop_window(w, {30.2, 40.6}, 16, 8).origin, (std::array<int, 2>{22, 33}));
}

TEST(CropWindow, RejectsOversizedWindow) {
  const World w = ramp_world(16);
  EXPECT_THROW(crop_window(w, {8.0, 8.0}, 32, 8), Error);
}

TEST(CropWindow, OverlapsAgree) {
  const World w = generate_world(WorldParams::defaults(64, 4));
  const SceneWindow a = window_at(w, {0, 8}, 32, 16);
  const SceneWindow b = window_at(w, {20, 0}, 32, 16);
  for (int x = 20; x < 32; ++x)
    for (int y = 8; y < 32; ++y) {
      EXPECT_EQ(a.heights.at(x - 0, y - 8), b.heights.at(x - 20, y - 0));
      EXPECT_EQ(a.labels.at(x - 0, y - 8), b.labels.at(x - 20, y - 0));
    }
}

TEST(BuildVolume, MinimumElevationFillsToSeaLevel) {
  const LocalVolume v = build_volume(window_at(flat_world(8, -1.0, Label::grass), {0, 0}, 8, 16));
  // round(0 * 15) = 0 before the fill; sea level round(7.5) = 8.
  EXPECT_EQ(sea_level_index(16), 8);
  for (int s : v.surface_index.data) EXPECT_EQ(s, 8);
  for (Label l : v.column_label.data) EXPECT_EQ(l, Label::water);
}

TEST(BuildVolume, MaximumElevation) {
  const LocalVolume v = build_volume(window_at(flat_world(8, 1.0, Label::rock), {0, 0}, 8, 16));
  for (int s : v.surface_index.data) EXPECT_EQ(s, 15);
  for (Label l : v.column_label.data) EXPECT_EQ(l, Label::rock);
}

TEST(BuildVolume, AffineSurfaceIndex) {
  World w = flat_world(8, 0.0, Label::grass);
  w.height.heights.at(1, 1) = 0.5;
  const LocalVolume v = build_volume(window_at(w, {0, 0}, 8, 33));
  EXPECT_EQ(v.surface_index.at(0, 0), 16);
  EXPECT_EQ(v.surface_index.at(1, 1), 24);
}

TEST(BuildVolume, RampIsMonotone) {
  const int n = 32;
  World w = flat_world(n, 0.0, Label::grass);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w.height.heights.at(i, j) = -1.0 + 2.0 * i / (n - 1);
  const LocalVolume v = build_volume(window_at(w, {0, 0}, n, 64));
  for (int j = 0; j < n; ++j)
    for (int i = 1; i < n; ++i) EXPECT_GE(v.surface_index.at(i, j), v.surface_index.at(i - 1, j));
}

TEST(QueryVoxel, AboveAndBelowSurface) {
  World w = flat_world(8, 0.0, Label::dirt);
  const LocalVolume v = build_volume(window_at(w, {0, 0}, 8, 16));
  const int s = v.surface_index.at(2, 3);
  const VoxelQuery above = query_voxel(v, {2.5, 3.5, s + 1.5});
  EXPECT_FALSE(above.occupied);
  EXPECT_EQ(above.label, Label::sky);
  const VoxelQuery below = query_voxel(v, {2.5, 3.5, s + 0.5});
  EXPECT_TRUE(below.occupied);
  EXPECT_EQ(below.label, Label::dirt);
  EXPECT_DOUBLE_EQ(below.height_fraction, (s + 0.5) / 16);
  EXPECT_FALSE(query_voxel(v, {-0.1, 3.0, 1.0}).occupied);
  EXPECT_FALSE(query_voxel(v, {8.0, 3.0, 1.0}).occupied);
  EXPECT_FALSE(query_voxel(v, {3.0, 3.0, 16.0}).occupied);
}

TEST(QueryVoxel, MatchesDenseOracle) {
  const World w = generate_world(WorldParams::defaults(64, 6));
  const int n_w = 32, h_w = 24;
  const LocalVolume v = build_volume(window_at(w, {16, 8}, n_w, h_w));
  // Dense occupancy / label array built independently from the heights.
  std::vector<int> dense(static_cast<std::size_t>(n_w) * n_w * h_w, -1);
  for (int i = 0; i < n_w; ++i)
    for (int j = 0; j < n_w; ++j) {
      const double h = w.height.heights.at(16 + i, 8 + j);
      int top = static_cast<int>(std::lround((h + 1.0) / 2.0 * (h_w - 1)));
      Label l = w.semantic.labels.at(16 + i, 8 + j);
      if (h < 0.0) {
        top = std::max(top, static_cast<int>(std::lround(0.5 * (h_w - 1))));
        l = Label::water;
      }
      for (int k = 0; k <= top; ++k) dense[(static_cast<std::size_t>(i) * n_w + j) * h_w + k] = static_cast<int>(l);
    }
  Rng rng(3);
  for (int q = 0; q < 100000; ++q) {
    const Vec3 p{rng.uniform(-2, n_w + 2), rng.uniform(-2, n_w + 2), rng.uniform(-2, h_w + 2)};
    const VoxelQuery r = query_voxel(v, p);
    int expect = -1;
    if (p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < n_w && p.y < n_w && p.z < h_w)
      expect = dense[(static_cast<std::size_t>(p.x) * n_w + static_cast<int>(p.y)) * h_w + static_cast<int>(p.z)];
    EXPECT_EQ(r.occupied, expect >= 0);
    EXPECT_EQ(static_cast<int>(r.label), expect >= 0 ? expect : static_cast<int>(Label::sky));
  }
}

TEST(ToGlobal, Corners) {
  const World w = ramp_world(64);
  const SceneWindow a = window_at(w, {0, 0}, 32, 16);
  const Vec3 g0 = to_global(64, a, {0, 0, 0});
  EXPECT_EQ(g0, (Vec3{0, 0, 0}));
  const SceneWindow b = window_at(w, {32, 32}, 32, 16);
  const Vec3 g1 = to_global(64, b, {32, 32, 16});
  EXPECT_EQ(g1, (Vec3{1, 1, 1}));
}

TEST(ToGlobal, CrossWindowEquality) {
  const World w = ramp_world(128);
  const SceneWindow a = window_at(w, {10, 20}, 64, 32);
  const SceneWindow b = window_at(w, {40, 30}, 64, 32);
  Rng rng(8);
  for (int k = 0; k < 10000; ++k) {
    const Vec3 p{rng.uniform(40, 74), rng.uniform(30, 84), rng.uniform(0, 32)};
    const Vec3 ga = to_global(128, a, {p.x - 10, p.y - 20, p.z});
    const Vec3 gb = to_global(128, b, {p.x - 40, p.y - 30, p.z});
    EXPECT_EQ(ga, gb);
  }
}

}  // namespace
}  // namespace bevscape
