// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// extern "C" surface over the engine. Exceptions never cross this boundary:
// each entry point maps them to a status and records the message per thread.
#include "bevscape/bevscape.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "core/evalmetrics.hpp"
#include "core/formats.hpp"
#include "core/pose_sampling.hpp"
#include "core/training.hpp"
#include "core/window.hpp"
#include "core/worldgen.hpp"

using namespace bevscape;

struct bvs_world {
  World world;
};

struct bvs_model {
  Checkpoint ck;
};

struct bvs_session {
  const World* world = nullptr;
  const bvs_model* model = nullptr;
  WindowBinder binder;
  int n_w = 0;
  int h_w = 0;
  FeatureField own_field;
  FeatureField field;  // own_field, or a blend toward another world
};

struct bvs_frame {
  FrameBuffers fb;
  Intrinsics intr;
  CameraPose pose;  // world coordinates
  std::array<int, 2> origin{0, 0};
  int n_w = 0;
  int h_w = 0;
};

namespace {

thread_local std::string g_last_error;

bvs_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return BVS_ERR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return BVS_ERR_DIMENSION_MISMATCH;
    case ErrorCode::io: return BVS_ERR_IO;
    case ErrorCode::format: return BVS_ERR_FORMAT;
    case ErrorCode::checksum: return BVS_ERR_CHECKSUM;
    case ErrorCode::runtime: return BVS_ERR_RUNTIME;
  }
  return BVS_ERR_INTERNAL;
}

template <class F>
bvs_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BVS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BVS_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BVS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return BVS_ERR_INTERNAL;
  }
}

template <class T>
void need(const T* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

void copy_out(std::span<const double> src, double* out, std::size_t count) {
  need(out, "output buffer");
  if (count != src.size())
    fail(ErrorCode::dimension_mismatch,
         "buffer holds " + std::to_string(count) + " values, " + std::to_string(src.size()) + " required");
  std::copy(src.begin(), src.end(), out);
}

CameraPose pose_from(const bvs_pose& p) {
  const Vec3 pos{p.x, p.y, p.z}, target{p.tx, p.ty, p.tz};
  const Vec3 view = target - pos;
  if (!(norm(view) > 0.0)) fail(ErrorCode::invalid_argument, "camera position and target coincide");
  const Vec3 up = norm(cross(normalize(view), Vec3{0, 0, 1})) < 1e-6 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
  return look_at(pos, target, up);
}

bvs_pose pose_to(const CameraPose& c, const Vec3& target) {
  return {c.position.x, c.position.y, c.position.z, target.x, target.y, target.z};
}

TrainConfig train_config_from(const bvs_train_config& c) {
  if (c.hash_log2_table < 0 || c.hash_log2_table > 30)
    fail(ErrorCode::invalid_argument, "hash_log2_table must lie in [0, 30]");
  TrainConfig t;
  t.iterations = c.iterations;
  t.patch = c.patch;
  t.samples = c.samples;
  t.fov_y = c.fov_y;
  t.lr_encoder = c.lr_encoder;
  t.lr_hash = c.lr_hash;
  t.lr_field = c.lr_field;
  t.w_mse = c.mse_weight;
  t.seed = c.seed;
  t.style_seed = c.style_seed;
  t.n_w = c.n_w;
  t.h_w = c.h_w;
  t.hidden = c.hidden;
  t.hash.levels = c.hash_levels;
  t.hash.table_size = 1u << c.hash_log2_table;
  t.hash.channels = c.hash_channels;
  t.hash.n_min = c.hash_n_min;
  t.hash.n_max = c.hash_n_max;
  t.policy = RejectionPolicy::defaults(c.n_w);
  t.policy.fov_y = c.fov_y;
  t.validate();
  return t;
}

Intrinsics intrinsics_from(const bvs_render_options& o) {
  Intrinsics intr;
  intr.width = o.width;
  intr.height = o.height;
  intr.fov_y = o.fov_y;
  intr.validate();
  return intr;
}

}  // namespace

extern "C" {

const char* bvs_version(void) { return "0.1.0"; }

const char* bvs_last_error(void) { return g_last_error.c_str(); }

const char* bvs_status_name(bvs_status status) {
  switch (status) {
    case BVS_OK: return "ok";
    case BVS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BVS_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case BVS_ERR_IO: return "i/o error";
    case BVS_ERR_FORMAT: return "format error";
    case BVS_ERR_CHECKSUM: return "checksum error";
    case BVS_ERR_RUNTIME: return "runtime error";
    case BVS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- worlds ----

bvs_status bvs_world_params_default(int n, uint64_t seed, bvs_world_params* out) {
  return guarded([&] {
    need(out, "out");
    const WorldParams p = WorldParams::defaults(n, seed);
    *out = {p.seed, p.lod_n, p.octaves_low, p.octaves_high, p.base_frequency, p.biome_octaves, p.voronoi_cells,
            p.lloyd_iters};
  });
}

bvs_status bvs_world_generate(const bvs_world_params* params, const char* lut_path, const char* rules_path,
                              bvs_world** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    WorldParams p;
    p.seed = params->seed;
    p.lod_n = params->n;
    p.octaves_low = params->octaves_low;
    p.octaves_high = params->octaves_high;
    p.base_frequency = params->base_frequency;
    p.biome_octaves = params->biome_octaves;
    p.voronoi_cells = params->voronoi_cells;
    p.lloyd_iters = params->lloyd_iters;
    p.validate();
    const BiomeLut lut = lut_path ? read_lut(read_file(lut_path)) : default_biome_lut();
    const LabelRules rules = rules_path ? read_rules(read_file(rules_path)) : default_label_rules();
    *out = new bvs_world{generate_world(p, lut, rules)};
  });
}

bvs_status bvs_world_load(const char* path, bvs_world** out, int* h_w) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    BevFile f = read_bev(read_file(path));
    if (h_w) *h_w = f.h_w;
    *out = new bvs_world{std::move(f.world)};
  });
}

bvs_status bvs_world_save(const bvs_world* world, int h_w, const char* path) {
  return guarded([&] {
    need(world, "world");
    need(path, "path");
    write_file(path, write_bev(world->world, h_w));
  });
}

void bvs_world_free(bvs_world* world) { delete world; }

int bvs_world_size(const bvs_world* world) { return world ? world->world.n() : 0; }

bvs_status bvs_world_heights(const bvs_world* world, double* out, size_t count) {
  return guarded([&] {
    need(world, "world");
    copy_out(world->world.height.heights.data, out, count);
  });
}

bvs_status bvs_world_labels(const bvs_world* world, uint8_t* out, size_t count) {
  return guarded([&] {
    need(world, "world");
    need(out, "output buffer");
    const auto& d = world->world.semantic.labels.data;
    if (count != d.size()) fail(ErrorCode::dimension_mismatch, "label buffer size mismatch");
    std::transform(d.begin(), d.end(), out, [](Label l) { return static_cast<uint8_t>(l); });
  });
}

bvs_status bvs_world_write_previews(const bvs_world* world, const char* height_ppm, const char* label_ppm,
                                    const char* palette_path) {
  return guarded([&] {
    need(world, "world");
    const Palette pal = palette_path ? read_palette(read_file(palette_path)) : default_palette();
    if (height_ppm) write_file(height_ppm, encode_ppm(height_map_image(world->world.height)));
    if (label_ppm) write_file(label_ppm, encode_ppm(semantic_map_image(world->world.semantic, pal)));
  });
}

// ---- model ----

bvs_status bvs_train_config_default(bvs_train_config* out) {
  return guarded([&] {
    need(out, "out");
    const TrainConfig t;
    *out = {t.iterations, t.patch, t.samples, t.fov_y, t.lr_encoder, t.lr_hash, t.lr_field, t.w_mse, t.seed,
            t.style_seed, t.n_w, t.h_w, t.hidden, t.hash.levels, std::countr_zero(t.hash.table_size),
            t.hash.channels, t.hash.n_min, t.hash.n_max};
  });
}

bvs_status bvs_model_create(const bvs_train_config* config, bvs_model** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    *out = new bvs_model{initial_checkpoint(train_config_from(*config))};
  });
}

bvs_status bvs_model_load(const char* path, bvs_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new bvs_model{read_checkpoint(read_file(path))};
  });
}

bvs_status bvs_model_save(const bvs_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    write_file(path, write_checkpoint(model->ck));
  });
}

void bvs_model_free(bvs_model* model) { delete model; }

int64_t bvs_model_iteration(const bvs_model* model) { return model ? model->ck.iteration : 0; }

bvs_status bvs_style_sample(uint64_t seed, double z[BVS_STYLE_DIM]) {
  return guarded([&] {
    need(z, "z");
    const StyleCode s = StyleCode::sample(seed);
    std::copy(s.z.begin(), s.z.end(), z);
  });
}

bvs_status bvs_model_get_style(const bvs_model* model, double z[BVS_STYLE_DIM]) {
  return guarded([&] {
    need(model, "model");
    need(z, "z");
    std::copy(model->ck.model.style.z.begin(), model->ck.model.style.z.end(), z);
  });
}

bvs_status bvs_model_set_style(bvs_model* model, const double z[BVS_STYLE_DIM]) {
  return guarded([&] {
    need(model, "model");
    need(z, "z");
    for (int k = 0; k < BVS_STYLE_DIM; ++k)
      if (!std::isfinite(z[k])) fail(ErrorCode::invalid_argument, "style code must be finite");
    std::copy(z, z + BVS_STYLE_DIM, model->ck.model.style.z.begin());
  });
}

bvs_status bvs_train(const bvs_world* world, const bvs_train_config* config, const bvs_model* resume,
                     bvs_loss_callback callback, void* user, bvs_model** out) {
  return guarded([&] {
    need(world, "world");
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    const TrainConfig t = train_config_from(*config);
    TrainObserver obs;
    if (callback) obs = [callback, user](std::int64_t it, double loss) { callback(it, loss, user); };
    TrainResult r = train_toy(t, world->world, obs, resume ? &resume->ck : nullptr);
    *out = new bvs_model{std::move(r.checkpoint)};
  });
}

// ---- rendering ----

bvs_status bvs_render_options_default(bvs_render_options* out) {
  return guarded([&] {
    need(out, "out");
    const Intrinsics intr;
    const RenderOptions ro;
    *out = {intr.width, intr.height, intr.fov_y, ro.n_samples, ro.seed, ro.threads};
  });
}

bvs_status bvs_session_create(const bvs_world* world, const bvs_model* model, int n_w, int h_w, bvs_session** out) {
  return guarded([&] {
    need(world, "world");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_unique<bvs_session>(bvs_session{&world->world, model, WindowBinder(world->world, n_w, h_w),
                                                       n_w, h_w, {}, {}});
    if (model) {
      s->own_field = encode_field(world->world.height, world->world.semantic, model->ck.model.encoder);
      s->field = s->own_field;
    }
    *out = s.release();
  });
}

void bvs_session_free(bvs_session* session) { delete session; }

bvs_status bvs_session_set_scene_blend(bvs_session* session, const bvs_world* other, double t) {
  return guarded([&] {
    need(session, "session");
    if (!session->model) fail(ErrorCode::invalid_argument, "scene blending needs a neural model");
    if (!other) {
      session->field = session->own_field;
      return;
    }
    if (other->world.n() != session->world->n()) fail(ErrorCode::dimension_mismatch, "worlds differ in size");
    if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "blend factor must be finite");
    const FeatureField b = encode_field(other->world.height, other->world.semantic, session->model->ck.model.encoder);
    session->field = session->own_field;
    for (std::size_t k = 0; k < b.values.size(); ++k)
      session->field.values[k] = (1.0 - t) * session->own_field.values[k] + t * b.values[k];
  });
}

bvs_status bvs_session_render(bvs_session* session, const bvs_pose* pose, const bvs_render_options* options,
                              bvs_frame** out, int* rebound) {
  return guarded([&] {
    need(session, "session");
    need(pose, "pose");
    need(options, "options");
    need(out, "out");
    *out = nullptr;
    const Intrinsics intr = intrinsics_from(*options);
    const CameraPose world_pose = pose_from(*pose);
    const bool moved = session->binder.bind(world_pose.position);
    if (rebound) *rebound = moved ? 1 : 0;
    const LocalVolume& vol = session->binder.volume();
    const CameraPose local = session->binder.to_window(world_pose);
    RenderOptions ro;
    ro.n_samples = options->samples;
    ro.seed = options->seed;
    ro.threads = options->threads;

    auto f = std::make_unique<bvs_frame>();
    if (session->model) {
      const Model& m = session->model->ck.model;
      const Modulation mod = style_map(m.style, m.field);
      const NeuralScene scene{&vol, &session->field, &m.table, &m.field, &mod};
      f->fb = render_frame(local, intr, vol, NeuralShader(scene), ro);
    } else {
      f->fb = render_frame(local, intr, vol, SurrogateShader(vol), ro);
    }
    f->intr = intr;
    f->pose = world_pose;
    f->origin = vol.window.origin;
    f->n_w = session->n_w;
    f->h_w = session->h_w;
    *out = f.release();
  });
}

bvs_status bvs_circle_poses(const bvs_world* world, int n_w, int h_w, int count, bvs_pose* out) {
  return guarded([&] {
    need(world, "world");
    need(out, "out");
    require(count >= 1, "pose count must be positive");
    const World& w = world->world;
    require(n_w >= 1 && n_w <= w.n(), "window side must lie in [1, n]");
    require(h_w >= 2, "h_w must be at least 2");
    const LocalVolume full = build_volume(window_at(w, {0, 0}, w.n(), h_w));
    const int top = *std::max_element(full.surface_index.data.begin(), full.surface_index.data.end()) + 1;
    const double c = 0.5 * w.n();
    const int ci = std::min(w.n() / 2, w.n() - 1);
    CircleSpec spec = CircleSpec::evaluation(n_w, h_w);
    spec.center_x = c;
    spec.center_y = c;
    spec.altitude = top + spec.altitude;
    spec.target = Vec3{c, c, full.surface_index.at(ci, ci) + 1.0};
    const auto poses = circle_trajectory(count, spec);
    for (int k = 0; k < count; ++k) out[k] = pose_to(poses[k], spec.target);
  });
}

bvs_status bvs_sample_cameras(const bvs_world* world, int n_w, int h_w, double cx, double cy, uint64_t seed, int count,
                              bvs_pose* out, int* accepted) {
  return guarded([&] {
    need(world, "world");
    need(out, "out");
    require(count >= 1, "pose count must be positive");
    const LocalVolume vol = build_volume(crop_window(world->world, {cx, cy}, n_w, h_w));
    const Vec3 o{static_cast<double>(vol.window.origin[0]), static_cast<double>(vol.window.origin[1]), 0.0};
    Rng rng(seed);
    const RejectionPolicy policy = RejectionPolicy::defaults(n_w);
    for (int k = 0; k < count; ++k) {
      const PoseSample s = sample_pose(vol, rng, policy);
      CameraPose p = s.pose;
      p.position = p.position + o;
      out[k] = pose_to(p, p.position + p.forward());
      if (accepted) accepted[k] = s.accepted ? 1 : 0;
    }
  });
}

void bvs_frame_free(bvs_frame* frame) { delete frame; }
int bvs_frame_width(const bvs_frame* frame) { return frame ? frame->fb.width : 0; }
int bvs_frame_height(const bvs_frame* frame) { return frame ? frame->fb.height : 0; }

bvs_status bvs_frame_rgb(const bvs_frame* frame, double* out, size_t count) {
  return guarded([&] {
    need(frame, "frame");
    copy_out(frame->fb.rgb, out, count);
  });
}

bvs_status bvs_frame_depth(const bvs_frame* frame, double* out, size_t count) {
  return guarded([&] {
    need(frame, "frame");
    copy_out(frame->fb.depth, out, count);
  });
}

bvs_status bvs_frame_residual(const bvs_frame* frame, double* out, size_t count) {
  return guarded([&] {
    need(frame, "frame");
    copy_out(frame->fb.residual, out, count);
  });
}

bvs_status bvs_frame_label_dist(const bvs_frame* frame, double* out, size_t count) {
  return guarded([&] {
    need(frame, "frame");
    copy_out(frame->fb.label_dist, out, count);
  });
}

bvs_status bvs_frame_write_ppm(const bvs_frame* frame, bvs_image_kind kind, const char* path,
                               const char* palette_path) {
  return guarded([&] {
    need(frame, "frame");
    need(path, "path");
    Image8 img;
    switch (kind) {
      case BVS_IMAGE_RGB: img = rgb_image(frame->fb); break;
      case BVS_IMAGE_DEPTH: img = depth_image(frame->fb); break;
      case BVS_IMAGE_LABEL:
        img = label_image(frame->fb, palette_path ? read_palette(read_file(palette_path)) : default_palette());
        break;
      default: fail(ErrorCode::invalid_argument, "unknown image kind");
    }
    write_file(path, encode_ppm(img));
  });
}

// ---- metrics ----

bvs_status bvs_frame_evaluate(const bvs_world* world, const bvs_frame* frame, bvs_frame_metrics* out) {
  return guarded([&] {
    need(world, "world");
    need(frame, "frame");
    need(out, "out");
    const LocalVolume vol = build_volume(window_at(world->world, frame->origin, frame->n_w, frame->h_w));
    CameraPose local = frame->pose;
    local.position = local.position - Vec3{static_cast<double>(frame->origin[0]),
                                           static_cast<double>(frame->origin[1]), 0.0};
    const DepthMap ref = surface_depth(vol, local, frame->intr);
    const DepthMap pred = depth_from_frame(frame->fb);
    std::size_t both = 0, n_pred = 0;
    double sum = 0.0;
    for (std::size_t p = 0; p < pred.pixels(); ++p) {
      if (pred.valid[p]) {
        ++n_pred;
        sum += pred.values[p];
      }
      if (pred.valid[p] && ref.valid[p]) ++both;
    }
    out->depth_error = both >= 2 ? depth_error(pred, ref) : std::nan("");
    out->valid_fraction = pred.pixels() ? static_cast<double>(both) / pred.pixels() : 0.0;
    out->label_entropy = label_entropy(frame->fb);
    out->mean_depth = n_pred ? sum / n_pred : std::nan("");
  });
}

bvs_status bvs_frame_reprojection(const bvs_frame* a, const bvs_frame* b, double* error, double* fraction) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(error, "error");
    if (a->intr.width != b->intr.width || a->intr.height != b->intr.height || a->intr.fov_y != b->intr.fov_y)
      fail(ErrorCode::dimension_mismatch, "frames have different intrinsics");
    const Reprojection r = reproject_consistency(depth_from_frame(a->fb), a->fb, a->pose, b->fb, b->pose, a->intr);
    *error = r.error;
    if (fraction) *fraction = r.fraction;
  });
}

bvs_status bvs_trajectory_read(const char* path, bvs_pose* out, size_t* count) {
  return guarded([&] {
    need(path, "path");
    need(count, "count");
    const Bytes b = read_file(path);
    const auto pts = parse_trajectory(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
    if (out) {
      if (*count < pts.size()) fail(ErrorCode::dimension_mismatch, "trajectory has more poses than the buffer holds");
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& t = pts[k];
        out[k] = {t.position.x, t.position.y, t.position.z, t.target.x, t.target.y, t.target.z};
      }
    }
    *count = pts.size();
  });
}

bvs_status bvs_trajectory_write(const char* path, const bvs_pose* poses, size_t count) {
  return guarded([&] {
    need(path, "path");
    if (count) need(poses, "poses");
    std::vector<TrajectoryPoint> pts;
    for (std::size_t k = 0; k < count; ++k) {
      const bvs_pose& p = poses[k];
      pts.push_back({{p.x, p.y, p.z}, {p.tx, p.ty, p.tz}});
    }
    const std::string s = format_trajectory(pts);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });
}

}  // extern "C"
