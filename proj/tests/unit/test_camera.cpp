// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "core/camera.hpp"

namespace bevscape {
namespace {

void expect_orthonormal(const CameraPose& p, double tol) {
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(dot(p.rotation[a], p.rotation[b]), a == b ? 1.0 : 0.0, tol);
  EXPECT_NEAR(dot(cross(p.rotation[0], p.rotation[1]), p.rotation[2]), 1.0, tol);
}

TEST(LookAt, CanonicalBasis) {
  const CameraPose p = look_at({0, 0, 0}, {0, 0, -1}, {0, 1, 0});
  EXPECT_EQ(p.rotation[0], (Vec3{1, 0, 0}));
  EXPECT_EQ(p.rotation[1], (Vec3{0, 1, 0}));
  EXPECT_EQ(p.rotation[2], (Vec3{0, 0, 1}));
}

TEST(LookAt, OrthonormalAndForward) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 pos{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const Vec3 tgt{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const CameraPose p = look_at(pos, tgt);
    expect_orthonormal(p, 1e-12);
    const Vec3 f = normalize(tgt - pos);
    EXPECT_NEAR(p.forward().x, f.x, 1e-12);
    EXPECT_NEAR(p.forward().y, f.y, 1e-12);
    EXPECT_NEAR(p.forward().z, f.z, 1e-12);
  }
}

TEST(LookAt, RejectsDegenerate) {
  EXPECT_THROW(look_at({1, 2, 3}, {1, 2, 3}), Error);
  EXPECT_THROW(look_at({0, 0, 5}, {0, 0, 0}, {0, 0, 1}), Error);
}

TEST(CastRay, CenterPixelIsForward) {
  Intrinsics intr;
  intr.width = intr.height = 33;
  const CameraPose p = look_at({3, 4, 5}, {10, -2, 1});
  const Ray r = cast_pixel_ray(p, intr, 16, 16);
  EXPECT_NEAR(r.direction.x, p.forward().x, 1e-12);
  EXPECT_NEAR(r.direction.y, p.forward().y, 1e-12);
  EXPECT_NEAR(r.direction.z, p.forward().z, 1e-12);
  EXPECT_EQ(r.origin, p.position);
}

TEST(CastRay, UnitDirections) {
  Intrinsics intr;
  intr.width = 40;
  intr.height = 30;
  const CameraPose p = look_at({0, 0, 10}, {5, 5, 0});
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) EXPECT_NEAR(norm(cast_pixel_ray(p, intr, x, y).direction), 1.0, 1e-12);
  EXPECT_THROW(cast_pixel_ray(p, intr, 40, 0), Error);
  EXPECT_THROW(cast_pixel_ray(p, intr, 0, -1), Error);
}

TEST(CastRay, CornerAngleClosedForm) {
  for (int res : {2, 8, 64, 255}) {
    Intrinsics intr;
    intr.width = intr.height = res;
    intr.fov_y = 0.9;
    const CameraPose p = look_at({0, 0, 0}, {1, 0, 0});
    const Ray r = cast_pixel_ray(p, intr, 0, 0);
    const double angle = std::acos(std::clamp(dot(r.direction, p.forward()), -1.0, 1.0));
    EXPECT_NEAR(angle, std::atan(std::tan(0.45) * std::sqrt(2.0) * (1.0 - 1.0 / res)), 1e-12);
  }
}

TEST(Project, InvertsCastRay) {
  Intrinsics intr;
  intr.width = 48;
  intr.height = 32;
  const CameraPose p = look_at({1, 2, 30}, {20, 20, 0});
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double px = rng.uniform(0, 48), py = rng.uniform(0, 32);
    const Ray r = cast_ray(p, intr, px, py);
    double qx = 0, qy = 0;
    ASSERT_TRUE(project(p, intr, r.at(rng.uniform(1, 100)), qx, qy));
    EXPECT_NEAR(qx, px, 1e-9);
    EXPECT_NEAR(qy, py, 1e-9);
  }
  double qx, qy;
  EXPECT_FALSE(project(p, intr, p.position - p.forward(), qx, qy));
}

TEST(Circle, EvaluationGeometry) {
  const CircleSpec s = CircleSpec::evaluation(1024, 256);
  EXPECT_EQ(s.center_x, 512.0);
  EXPECT_EQ(s.center_y, 512.0);
  EXPECT_DOUBLE_EQ(s.radius, 409.6);
  EXPECT_DOUBLE_EQ(s.altitude, 51.2);
  const auto poses = circle_trajectory(16, 1024, 256);
  for (const auto& p : poses) {
    EXPECT_NEAR(std::hypot(p.position.x - 512, p.position.y - 512), 409.6, 1e-9);
    EXPECT_DOUBLE_EQ(p.position.z, 51.2);
    expect_orthonormal(p, 1e-12);
    const Vec3 f = normalize(s.target - p.position);
    EXPECT_NEAR(dot(p.forward(), f), 1.0, 1e-12);
  }
}

TEST(Circle, SingleFrame) {
  const auto poses = circle_trajectory(1, 128, 64);
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_DOUBLE_EQ(poses[0].position.x, 0.9 * 128);
  EXPECT_DOUBLE_EQ(poses[0].position.y, 0.5 * 128);
  EXPECT_DOUBLE_EQ(poses[0].position.z, 0.2 * 64);
  EXPECT_THROW(circle_trajectory(0, 128, 64), Error);
}

TEST(Circle, UniformSpacing) {
  const auto poses = circle_trajectory(12, 256, 128);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const double angle = std::atan2(poses[k].position.y - 128, poses[k].position.x - 128);
    double expect = 2 * std::numbers::pi * k / 12;
    if (expect > std::numbers::pi) expect -= 2 * std::numbers::pi;
    EXPECT_NEAR(angle, expect, 1e-12);
  }
}

}  // namespace
}  // namespace bevscape
