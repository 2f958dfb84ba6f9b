// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/pose_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "core/evalmetrics.hpp"

namespace bevscape {

RejectionPolicy RejectionPolicy::defaults(int n_w) {
  RejectionPolicy p;
  p.tau_depth = 0.1 * n_w;
  return p;
}

void RejectionPolicy::validate() const {
  require(probe_size >= 1, "probe resolution must be positive");
  require(tau_entropy >= 0.0, "entropy threshold must be non-negative");
  require(max_attempts >= 1, "at least one sampling attempt is required");
}

FrameBuffers geometric_probe(const LocalVolume& vol, const CameraPose& pose, const Intrinsics& intr) {
  intr.validate();
  FrameBuffers fb(intr.width, intr.height);
  for (int py = 0; py < intr.height; ++py) {
    for (int px = 0; px < intr.width; ++px) {
      const std::size_t p = static_cast<std::size_t>(py) * intr.width + px;
      const SurfaceHit h = trace_surface(vol, cast_pixel_ray(pose, intr, px, py));
      if (h.hit) {
        fb.depth[p] = h.t;
        fb.residual[p] = 0.0;
        fb.label_dist[p * kNumLabels + static_cast<int>(h.label)] = 1.0;
      } else {
        fb.depth[p] = h.t_exit;
      }
    }
  }
  return fb;
}

double mean_depth(const FrameBuffers& fb) {
  double s = 0.0;
  for (double d : fb.depth) s += d;
  return fb.depth.empty() ? 0.0 : s / static_cast<double>(fb.depth.size());
}

PoseSample sample_pose(const LocalVolume& vol, Rng& rng, const RejectionPolicy& policy, const ProbeRenderer& probe) {
  policy.validate();
  const int n_w = vol.n_w(), h_w = vol.h_w();
  Intrinsics intr;
  intr.width = intr.height = policy.probe_size;
  intr.fov_y = policy.fov_y;

  auto top_of = [&vol](double x, double y) {
    const int i = std::clamp(static_cast<int>(x), 0, vol.n_w() - 1);
    const int j = std::clamp(static_cast<int>(y), 0, vol.n_w() - 1);
    return vol.surface_index.at(i, j) + 1.0;
  };

  PoseSample best;
  double best_score = -1.0;
  bool have_best = false;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    const double x = rng.uniform(0.0, n_w);
    const double y = rng.uniform(0.0, n_w);
    const double z_min = top_of(x, y) + 2.0;
    const double tx = rng.uniform(0.0, n_w);
    const double ty = rng.uniform(0.0, n_w);
    const double u = rng.uniform();
    if (z_min >= h_w) continue;
    const Vec3 pos{x, y, z_min + u * (h_w - z_min)};
    const Vec3 target{tx, ty, top_of(tx, ty)};
    const Vec3 view = target - pos;
    if (norm(view) == 0.0) continue;
    const Vec3 up = norm(cross(normalize(view), Vec3{0, 0, 1})) < 1e-6 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};

    PoseSample cand;
    cand.pose = look_at(pos, target, up);
    const FrameBuffers fb = probe ? probe(cand.pose, intr) : geometric_probe(vol, cand.pose, intr);
    cand.mean_depth = mean_depth(fb);
    cand.entropy = label_entropy(fb);
    cand.attempts = attempt;
    if (cand.mean_depth >= policy.tau_depth && cand.entropy >= policy.tau_entropy) {
      cand.accepted = true;
      return cand;
    }
    const double score = cand.mean_depth / n_w + cand.entropy / std::log(static_cast<double>(kNumLabels));
    if (!have_best || score > best_score) {
      best = cand;
      best_score = score;
      have_best = true;
    }
  }
  if (!have_best) {
    // Every column reached the ceiling; fall back to a view from the top face.
    const Vec3 pos{0.5 * n_w, 0.5 * n_w, static_cast<double>(h_w)};
    best.pose = look_at(pos, Vec3{0.5 * n_w + 1.0, 0.5 * n_w, 0.0});
  }
  best.attempts = policy.max_attempts;
  best.accepted = false;
  return best;
}

CircleSpec orbit_above_terrain(const LocalVolume& vol) {
  CircleSpec s = CircleSpec::evaluation(vol.n_w(), vol.h_w());
  const int top = *std::max_element(vol.surface_index.data.begin(), vol.surface_index.data.end()) + 1;
  s.altitude = top + s.altitude;
  const int c = vol.n_w() / 2;
  s.target = Vec3{s.center_x, s.center_y, vol.surface_index.at(c, c) + 1.0};
  return s;
}

WindowBinder::WindowBinder(const World& world, int n_w, int h_w) : world_(&world), n_w_(n_w), h_w_(h_w) {
  require(n_w <= world.n(), "window side exceeds world side");
}

bool WindowBinder::bind(const Vec3& camera_world) {
  if (volume_) {
    const auto& o = volume_->window.origin;
    const double lx = camera_world.x - o[0];
    const double ly = camera_world.y - o[1];
    const double lo = 0.25 * n_w_, hi = 0.75 * n_w_;
    if (lx >= lo && lx <= hi && ly >= lo && ly <= hi) return false;
  }
  LocalVolume next = build_volume(crop_window(*world_, {camera_world.x, camera_world.y}, n_w_, h_w_));
  const bool changed = !volume_ || next.window.origin != volume_->window.origin;
  volume_ = std::move(next);
  return changed;
}

Vec3 WindowBinder::to_window(const Vec3& p_world) const {
  const auto& o = volume_->window.origin;
  return {p_world.x - o[0], p_world.y - o[1], p_world.z};
}

CameraPose WindowBinder::to_window(const CameraPose& pose_world) const {
  CameraPose p = pose_world;
  p.position = to_window(pose_world.position);
  return p;
}

}  // namespace bevscape
