// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Style-modulated conditional radiance field and quadrature volume rendering.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/camera.hpp"
#include "core/common.hpp"
#include "core/encoder.hpp"
#include "core/hashgrid.hpp"
#include "core/window.hpp"

namespace bevscape {

inline constexpr int kStyleDim = 16;
inline constexpr int kDefaultSamples = 24;

struct StyleCode {
  std::array<double, kStyleDim> z{};

  static StyleCode sample(std::uint64_t seed);
  static StyleCode lerp(const StyleCode& a, const StyleCode& b, double t);
  bool operator==(const StyleCode&) const = default;
};

struct FieldDims {
  int feature_dim = 0;  // L * C_H of the hash grid
  int hidden = 64;
  int layers = 3;
  int embed = 8;
  int map_hidden = 64;

  int input_dim() const { return feature_dim + embed; }
  int modulation_dim() const { return layers * 2 * hidden + 3; }
  bool operator==(const FieldDims&) const = default;
};

// Flat parameter block. Layout: mapping network (z -> tanh hidden -> raw
// modulation), label embedding table, field MLP layers, color head, density
// head. Matrices are row-major [out][in] followed by their bias.
class FieldParams {
 public:
  FieldParams() = default;
  explicit FieldParams(const FieldDims& dims);  // zeros
  static FieldParams random(const FieldDims& dims, std::uint64_t seed);

  const FieldDims& dims() const { return dims_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  struct Offsets {
    std::size_t map_w0, map_b0, map_w1, map_b1, embed;
    std::vector<std::size_t> w, b;  // per hidden layer
    std::size_t w_rgb, b_rgb, w_sigma, b_sigma, total;
  };
  const Offsets& offsets() const { return offsets_; }

 private:
  FieldDims dims_;
  Offsets offsets_{};
  std::vector<double> values_;
};

// Raw mapping-network output; per layer scale = 1 + raw, shift = raw, and the
// sky color is the logistic of the last three entries.
struct Modulation {
  int hidden = 0;
  int layers = 0;
  std::vector<double> raw;

  double scale(int layer, int k) const { return 1.0 + raw[static_cast<std::size_t>(layer) * 2 * hidden + k]; }
  double shift(int layer, int k) const { return raw[static_cast<std::size_t>(layer) * 2 * hidden + hidden + k]; }
  Rgb sky() const;
};

Modulation style_map(const StyleCode& z, const FieldParams& params);
// Accumulates mapping-network gradients given d loss / d raw modulation.
void style_map_backward(const StyleCode& z, const FieldParams& params, std::span<const double> d_raw,
                        std::span<double> d_params);

struct FieldSample {
  Rgb rgb{};
  double sigma = 0.0;
};

// Activations of one field evaluation, kept for the backward pass.
struct FieldTape {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;  // W x + b per hidden layer
  std::vector<std::vector<double>> mid;  // scale * pre + shift
  std::vector<std::vector<double>> act;  // silu(mid)
  Rgb rgb_pre{};
  double sigma_pre = 0.0;
};

FieldSample field_eval(std::span<const double> f_x, Label label, const Modulation& mod, const FieldParams& params,
                       FieldTape* tape = nullptr);

// Reverse pass for one non-sky evaluation. Adds into d_params, d_raw (the
// modulation) and writes d loss / d f_x.
void field_eval_backward(const FieldTape& tape, Label label, const Modulation& mod, const FieldParams& params,
                         const Rgb& d_rgb, double d_sigma, std::span<double> d_params, std::span<double> d_raw,
                         std::span<double> d_fx);

struct FrameBuffers {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;         // 3 per pixel
  std::vector<double> depth;       // ray-parameter units
  std::vector<double> label_dist;  // kNumLabels per pixel, accumulated sample weights
  std::vector<double> residual;    // transmittance left after the last sample

  FrameBuffers() = default;
  FrameBuffers(int w, int h);
  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  // Label distribution with the residual transmittance assigned to sky.
  std::array<double, kNumLabels> effective_labels(std::size_t pixel) const;
};

struct RayResult {
  Rgb rgb{};
  double depth = 0.0;
  std::array<double, kNumLabels> label_dist{};
  double residual = 1.0;
  double weight_sum = 0.0;
};

struct RaySample {
  double t = 0.0;
  double delta = 0.0;
  Vec3 p;
  VoxelQuery voxel;
};

// Stratified sample positions in [t_near, t_far); jitter is a pure function
// of (seed, sample index).
std::vector<RaySample> stratified_samples(const LocalVolume& vol, const Ray& ray, int n_samples, double t_near,
                                          double t_far, std::uint64_t seed);

// Ray/window box [0, n_w]^2 x [0, h_w] overlap; false when the ray misses.
bool window_interval(const LocalVolume& vol, const Ray& ray, double& t_near, double& t_far);

// Alpha compositing of shaded samples with the background filling the
// residual transmittance.
RayResult composite(std::span<const RaySample> samples, std::span<const FieldSample> shaded, const Rgb& background,
                    double t_far, std::vector<double>* weights = nullptr);

// Per-point radiance model: anything that turns occupied voxel samples into
// color and density.
class SampleShader {
 public:
  virtual ~SampleShader() = default;
  virtual FieldSample shade(const RaySample& s) const = 0;
  virtual Rgb background() const = 0;
};

// The neural field evaluated on global coordinates of a local window.
struct NeuralScene {
  const LocalVolume* volume = nullptr;
  const FeatureField* field = nullptr;
  const HashGridTable* table = nullptr;
  const FieldParams* params = nullptr;
  const Modulation* modulation = nullptr;

  int world_n() const { return volume->window.world_n; }
};

class NeuralShader final : public SampleShader {
 public:
  explicit NeuralShader(const NeuralScene& scene) : scene_(scene) {}
  FieldSample shade(const RaySample& s) const override;
  Rgb background() const override { return scene_.modulation->sky(); }

 private:
  NeuralScene scene_;
};

struct RaySampling {
  int n_samples = kDefaultSamples;
  std::uint64_t seed = 0;
  // Explicit interval; when unset the window box interval is used.
  bool explicit_range = false;
  double t_near = 0.0;
  double t_far = 0.0;
};

RayResult render_ray(const LocalVolume& vol, const SampleShader& shader, const Ray& ray, const RaySampling& sampling);
RayResult render_ray(const NeuralScene& scene, const Ray& ray, const RaySampling& sampling);

struct RenderOptions {
  int n_samples = kDefaultSamples;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

std::uint64_t pixel_seed(std::uint64_t frame_seed, std::size_t pixel);

FrameBuffers render_frame(const CameraPose& pose, const Intrinsics& intr, const LocalVolume& vol,
                          const SampleShader& shader, const RenderOptions& opts);

// Gradient accumulators for the differentiable path of one frame.
struct SceneGradients {
  std::vector<double> table;          // same layout as the hash table entries
  std::vector<double> params;         // field params incl. mapping network
  std::vector<double> modulation;     // d / d raw modulation
  std::vector<double> feature_field;  // d / d feature field values

  void reset(const NeuralScene& scene);
};

// Reverse pass for one ray given d loss / d rgb (depth and labels carry no
// loss). Recomputes the forward pass internally.
void render_ray_backward(const NeuralScene& scene, const Ray& ray, const RaySampling& sampling, const Rgb& d_rgb,
                         SceneGradients& grads);

// Forward + backward over a frame. `d_rgb` maps a pixel's rendered color to
// d loss / d color and is called in pixel order.
void render_frame_backward(const NeuralScene& scene, const CameraPose& pose, const Intrinsics& intr,
                           const RenderOptions& opts, const std::function<Rgb(std::size_t, const Rgb&)>& d_rgb,
                           SceneGradients& grads);

}  // namespace bevscape
