/*
 * Copyright 2026 The bevscape Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the bevscape engine: procedural BEV worlds, the neural scene
 * model, volume rendering with sliding windows, toy training and metrics.
 *
 * Conventions:
 *  - Every fallible call returns bvs_status; BVS_OK is 0. On failure,
 *    bvs_last_error() describes the most recent error on the calling thread.
 *  - Objects are opaque handles released with the matching *_free function.
 *    Passing NULL to a *_free function is a no-op.
 *  - Coordinates are world voxel units: x, y in [0, n), z up in [0, h_w].
 *  - Handles may be used from several threads for reading; mutation of a
 *    handle (set_style, session rendering) requires external synchronization.
 */
#ifndef BEVSCAPE_BEVSCAPE_H_
#define BEVSCAPE_BEVSCAPE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BEVSCAPE_BUILDING)
#    define BVS_API __declspec(dllexport)
#  else
#    define BVS_API __declspec(dllimport)
#  endif
#else
#  define BVS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bvs_status {
  BVS_OK = 0,
  BVS_ERR_INVALID_ARGUMENT = 1,
  BVS_ERR_DIMENSION_MISMATCH = 2,
  BVS_ERR_IO = 3,
  BVS_ERR_FORMAT = 4,
  BVS_ERR_CHECKSUM = 5,
  BVS_ERR_RUNTIME = 6,
  BVS_ERR_INTERNAL = 7
} bvs_status;

enum { BVS_NUM_LABELS = 12, BVS_STYLE_DIM = 16 };

typedef enum bvs_image_kind { BVS_IMAGE_RGB = 0, BVS_IMAGE_DEPTH = 1, BVS_IMAGE_LABEL = 2 } bvs_image_kind;

typedef struct bvs_world bvs_world;
typedef struct bvs_model bvs_model;
typedef struct bvs_session bvs_session;
typedef struct bvs_frame bvs_frame;

BVS_API const char* bvs_version(void);
BVS_API const char* bvs_last_error(void);
BVS_API const char* bvs_status_name(bvs_status status);

/* ---- worlds ---- */

typedef struct bvs_world_params {
  uint64_t seed;
  int n;              /* side length, power of two >= 8 */
  int octaves_low;
  int octaves_high;
  double base_frequency;
  int biome_octaves;
  int voronoi_cells;
  int lloyd_iters;
} bvs_world_params;

/* Defaults for side n (Voronoi cell count scales with n^2). */
BVS_API bvs_status bvs_world_params_default(int n, uint64_t seed, bvs_world_params* out);

/* lut_path and rules_path may be NULL for the built-in tables. */
BVS_API bvs_status bvs_world_generate(const bvs_world_params* params, const char* lut_path, const char* rules_path,
                                      bvs_world** out);
BVS_API bvs_status bvs_world_load(const char* path, bvs_world** out, int* h_w);
BVS_API bvs_status bvs_world_save(const bvs_world* world, int h_w, const char* path);
BVS_API void bvs_world_free(bvs_world* world);

BVS_API int bvs_world_size(const bvs_world* world);
/* Copies n*n values, row-major (i along x, j along y). */
BVS_API bvs_status bvs_world_heights(const bvs_world* world, double* out, size_t count);
BVS_API bvs_status bvs_world_labels(const bvs_world* world, uint8_t* out, size_t count);
/* Writes PPM previews of the height and semantic maps; palette_path may be NULL. */
BVS_API bvs_status bvs_world_write_previews(const bvs_world* world, const char* height_ppm, const char* label_ppm,
                                            const char* palette_path);

/* ---- model ---- */

typedef struct bvs_train_config {
  int iterations;
  int patch;          /* square patch side */
  int samples;        /* samples per ray */
  double fov_y;       /* radians */
  double lr_encoder;
  double lr_hash;
  double lr_field;
  double mse_weight;
  uint64_t seed;
  uint64_t style_seed;
  int n_w;
  int h_w;
  int hidden;
  int hash_levels;
  int hash_log2_table;
  int hash_channels;
  int hash_n_min;
  int hash_n_max;
} bvs_train_config;

BVS_API bvs_status bvs_train_config_default(bvs_train_config* out);

/* Fresh randomly initialized model. */
BVS_API bvs_status bvs_model_create(const bvs_train_config* config, bvs_model** out);
BVS_API bvs_status bvs_model_load(const char* path, bvs_model** out);
BVS_API bvs_status bvs_model_save(const bvs_model* model, const char* path);
BVS_API void bvs_model_free(bvs_model* model);
BVS_API int64_t bvs_model_iteration(const bvs_model* model);

BVS_API bvs_status bvs_style_sample(uint64_t seed, double z[BVS_STYLE_DIM]);
BVS_API bvs_status bvs_model_get_style(const bvs_model* model, double z[BVS_STYLE_DIM]);
BVS_API bvs_status bvs_model_set_style(bvs_model* model, const double z[BVS_STYLE_DIM]);

typedef void (*bvs_loss_callback)(int64_t iteration, double loss, void* user);

/* Runs config->iterations steps on the world. resume may be NULL; otherwise
 * training continues from its state. callback may be NULL. */
BVS_API bvs_status bvs_train(const bvs_world* world, const bvs_train_config* config, const bvs_model* resume,
                             bvs_loss_callback callback, void* user, bvs_model** out);

/* ---- rendering ---- */

typedef struct bvs_pose {
  double x, y, z;     /* camera position */
  double tx, ty, tz;  /* look-at target */
} bvs_pose;

typedef struct bvs_render_options {
  int width;
  int height;
  double fov_y;       /* radians */
  int samples;
  uint64_t seed;
  int threads;        /* 0: all hardware threads */
} bvs_render_options;

BVS_API bvs_status bvs_render_options_default(bvs_render_options* out);

/* A session binds an n_w x n_w x h_w window to the camera, re-cropping it when
 * the camera leaves the central half of the current window. model NULL renders
 * the opaque procedural surrogate instead of the neural field. */
BVS_API bvs_status bvs_session_create(const bvs_world* world, const bvs_model* model, int n_w, int h_w,
                                      bvs_session** out);
BVS_API void bvs_session_free(bvs_session* session);

/* Blends the scene feature field toward another world of the same size:
 * f_s = (1 - t) f_s(own) + t f_s(other). other NULL resets the blend. */
BVS_API bvs_status bvs_session_set_scene_blend(bvs_session* session, const bvs_world* other, double t);

/* rebound (may be NULL) reports whether the window moved for this frame. */
BVS_API bvs_status bvs_session_render(bvs_session* session, const bvs_pose* pose, const bvs_render_options* options,
                                      bvs_frame** out, int* rebound);

/* Evaluation orbit over the world center: radius 0.4 n_w, lifted above the
 * tallest column by 0.2 h_w, looking at the surface under the center. */
BVS_API bvs_status bvs_circle_poses(const bvs_world* world, int n_w, int h_w, int count, bvs_pose* out);

/* Rejection-sampled training views inside the window centered at (cx, cy).
 * accepted (may be NULL) receives 1 for poses that passed both thresholds. */
BVS_API bvs_status bvs_sample_cameras(const bvs_world* world, int n_w, int h_w, double cx, double cy, uint64_t seed,
                                      int count, bvs_pose* out, int* accepted);

BVS_API void bvs_frame_free(bvs_frame* frame);
BVS_API int bvs_frame_width(const bvs_frame* frame);
BVS_API int bvs_frame_height(const bvs_frame* frame);
/* Buffer copies: rgb 3 per pixel, depth and residual 1 per pixel, label
 * distribution BVS_NUM_LABELS per pixel. */
BVS_API bvs_status bvs_frame_rgb(const bvs_frame* frame, double* out, size_t count);
BVS_API bvs_status bvs_frame_depth(const bvs_frame* frame, double* out, size_t count);
BVS_API bvs_status bvs_frame_residual(const bvs_frame* frame, double* out, size_t count);
BVS_API bvs_status bvs_frame_label_dist(const bvs_frame* frame, double* out, size_t count);
/* palette_path may be NULL; it is only read for BVS_IMAGE_LABEL. */
BVS_API bvs_status bvs_frame_write_ppm(const bvs_frame* frame, bvs_image_kind kind, const char* path,
                                       const char* palette_path);

/* ---- metrics ---- */

typedef struct bvs_frame_metrics {
  double depth_error;      /* against the exact surface depth of the frame window */
  double valid_fraction;   /* pixels valid in both depth maps */
  double label_entropy;    /* nats */
  double mean_depth;
} bvs_frame_metrics;

BVS_API bvs_status bvs_frame_evaluate(const bvs_world* world, const bvs_frame* frame, bvs_frame_metrics* out);

/* Reprojection of frame a into frame b using a's rendered depth. */
BVS_API bvs_status bvs_frame_reprojection(const bvs_frame* a, const bvs_frame* b, double* error, double* fraction);

/* Trajectory CSV (x,y,z,tx,ty,tz per line). On input *count is the capacity
 * of out (out may be NULL to query); on output it is the number of poses. */
BVS_API bvs_status bvs_trajectory_read(const char* path, bvs_pose* out, size_t* count);
BVS_API bvs_status bvs_trajectory_write(const char* path, const bvs_pose* poses, size_t count);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* BEVSCAPE_BEVSCAPE_H_ */
