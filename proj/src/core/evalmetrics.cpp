// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bevscape {

double depth_error(const DepthMap& pred, const DepthMap& ref) {
  if (pred.width != ref.width || pred.height != ref.height)
    fail(ErrorCode::dimension_mismatch, "depth maps differ in size");
  std::vector<std::size_t> joint;
  for (std::size_t p = 0; p < pred.pixels(); ++p)
    if (pred.valid[p] && ref.valid[p]) joint.push_back(p);
  require(joint.size() >= 2, "depth error needs at least two jointly valid pixels");

  auto moments = [&joint](const std::vector<double>& v) {
    double mean = 0.0;
    for (std::size_t p : joint) mean += v[p];
    mean /= static_cast<double>(joint.size());
    double var = 0.0;
    for (std::size_t p : joint) var += (v[p] - mean) * (v[p] - mean);
    var /= static_cast<double>(joint.size());
    return std::pair{mean, std::sqrt(var)};
  };
  const auto [mp, sp] = moments(pred.values);
  const auto [mr, sr] = moments(ref.values);
  require(sp > 0.0 && sr > 0.0, "depth error is undefined for constant depth maps");

  double err = 0.0;
  for (std::size_t p : joint) {
    const double d = (pred.values[p] - mp) / sp - (ref.values[p] - mr) / sr;
    err += d * d;
  }
  return err / static_cast<double>(joint.size());
}

DepthMap depth_from_frame(const FrameBuffers& fb, double max_residual) {
  DepthMap d(fb.width, fb.height);
  for (std::size_t p = 0; p < fb.pixels(); ++p) {
    d.values[p] = fb.depth[p];
    d.valid[p] = fb.residual[p] <= max_residual ? 1 : 0;
  }
  return d;
}

SurfaceHit trace_surface(const LocalVolume& vol, const Ray& ray) {
  SurfaceHit hit;
  double t0 = 0.0, t1 = 0.0;
  if (!window_interval(vol, ray, t0, t1)) return hit;
  hit.t_exit = t1;
  const int dims[3] = {vol.n_w(), vol.n_w(), vol.h_w()};
  const Vec3 start = ray.at(t0);
  int idx[3];
  int step[3];
  double t_max[3], t_delta[3];
  for (int a = 0; a < 3; ++a) {
    idx[a] = std::clamp(static_cast<int>(std::floor(start[a])), 0, dims[a] - 1);
    const double d = ray.direction[a];
    if (d > 0.0) {
      step[a] = 1;
      t_max[a] = (idx[a] + 1 - ray.origin[a]) / d;
      t_delta[a] = 1.0 / d;
    } else if (d < 0.0) {
      step[a] = -1;
      t_max[a] = (idx[a] - ray.origin[a]) / d;
      t_delta[a] = -1.0 / d;
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  auto occupied = [&] { return idx[2] <= vol.surface_index.at(idx[0], idx[1]); };
  double t = t0;
  while (true) {
    if (occupied()) {
      hit.hit = true;
      hit.t = t;
      hit.label = vol.column_label.at(idx[0], idx[1]);
      return hit;
    }
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    t = t_max[a];
    if (t > t1) return hit;
    idx[a] += step[a];
    if (idx[a] < 0 || idx[a] >= dims[a]) return hit;
    t_max[a] += t_delta[a];
  }
}

DepthMap surface_depth(const LocalVolume& vol, const CameraPose& pose, const Intrinsics& intr) {
  intr.validate();
  DepthMap d(intr.width, intr.height);
  for (int py = 0; py < intr.height; ++py) {
    for (int px = 0; px < intr.width; ++px) {
      const std::size_t p = static_cast<std::size_t>(py) * intr.width + px;
      const SurfaceHit h = trace_surface(vol, cast_pixel_ray(pose, intr, px, py));
      d.values[p] = h.hit ? h.t : 0.0;
      d.valid[p] = h.hit ? 1 : 0;
    }
  }
  return d;
}

Reprojection reproject_consistency(const DepthMap& depth_a, const FrameBuffers& rgb_a, const CameraPose& pose_a,
                                   const FrameBuffers& rgb_b, const CameraPose& pose_b, const Intrinsics& intr,
                                   bool visibility_test) {
  if (depth_a.width != intr.width || depth_a.height != intr.height || rgb_a.width != intr.width ||
      rgb_a.height != intr.height || rgb_b.width != intr.width || rgb_b.height != intr.height)
    fail(ErrorCode::dimension_mismatch, "reprojection inputs differ in size");
  const int W = intr.width, H = intr.height;
  auto fetch = [&](int x, int y, int c) {
    x = std::clamp(x, 0, W - 1);
    y = std::clamp(y, 0, H - 1);
    return rgb_b.rgb[(static_cast<std::size_t>(y) * W + x) * 3 + c];
  };
  // B's surface distance at a pixel; sky and mostly transparent pixels occlude nothing.
  const DepthMap depth_b = depth_from_frame(rgb_b);
  auto surface_b = [&](int x, int y) {
    x = std::clamp(x, 0, W - 1);
    y = std::clamp(y, 0, H - 1);
    const std::size_t q = static_cast<std::size_t>(y) * W + x;
    return depth_b.valid[q] ? depth_b.values[q] : std::numeric_limits<double>::infinity();
  };
  std::size_t valid = 0, inside = 0;
  double err = 0.0;
  for (int py = 0; py < H; ++py) {
    for (int px = 0; px < W; ++px) {
      const std::size_t p = static_cast<std::size_t>(py) * W + px;
      if (!depth_a.valid[p]) continue;
      ++valid;
      const Vec3 world = cast_pixel_ray(pose_a, intr, px, py).at(depth_a.values[p]);
      double u = 0, v = 0;
      if (!project(pose_b, intr, world, u, v)) continue;
      if (u < 0.0 || v < 0.0 || u >= W || v >= H) continue;
      // Bilinear over pixel centers.
      const double fx = u - 0.5, fy = v - 0.5;
      const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
      if (visibility_test) {
        // Occluded only if behind all four neighbors, beyond one voxel plus 2%.
        const double dist = norm(world - pose_b.position);
        const double front = std::max({surface_b(x0, y0), surface_b(x0 + 1, y0), surface_b(x0, y0 + 1),
                                       surface_b(x0 + 1, y0 + 1)});
        if (dist > front + 1.0 + 0.02 * dist) continue;
      }
      ++inside;
      const double ax = fx - x0, ay = fy - y0;
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double s = (1 - ax) * (1 - ay) * fetch(x0, y0, c) + ax * (1 - ay) * fetch(x0 + 1, y0, c) +
                         (1 - ax) * ay * fetch(x0, y0 + 1, c) + ax * ay * fetch(x0 + 1, y0 + 1, c);
        diff += std::abs(s - rgb_a.rgb[p * 3 + c]);
      }
      err += diff / 3.0;
    }
  }
  Reprojection r;
  if (inside == 0) return r;
  r.error = err / static_cast<double>(inside);
  r.fraction = static_cast<double>(inside) / static_cast<double>(valid);
  return r;
}

double label_entropy(const FrameBuffers& fb) {
  std::array<double, kNumLabels> mean{};
  for (std::size_t p = 0; p < fb.pixels(); ++p) {
    const auto e = fb.effective_labels(p);
    for (int l = 0; l < kNumLabels; ++l) mean[l] += e[l];
  }
  double total = 0.0;
  for (double v : mean) total += v;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : mean) {
    const double q = v / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

}  // namespace bevscape
