// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reconstruction training of the full differentiable path (scene encoder,
// hash grid, modulated field, volume rendering) against a procedural
// colorization of the terrain.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/encoder.hpp"
#include "core/hashgrid.hpp"
#include "core/pose_sampling.hpp"
#include "core/renderfield.hpp"
#include "core/window.hpp"
#include "core/worldgen.hpp"

namespace bevscape {

// Procedural target color: palette albedo shaded by height, plus a small
// deterministic perturbation, clamped to [0, 1].
Rgb oracle_colorize(const Palette& palette, Label label, double height_fraction, double shade_noise);
inline Rgb oracle_colorize(Label label, double height_fraction, double shade_noise) {
  return oracle_colorize(default_palette(), label, height_fraction, shade_noise);
}

// Per world column perturbation in [-amplitude, amplitude].
double column_noise(std::uint64_t seed, int world_i, int world_j, double amplitude = 0.05);

// Opaque stand-in for the neural field: very high density inside occupied
// voxels, colored by oracle_colorize.
class SurrogateShader final : public SampleShader {
 public:
  struct Options {
    double sigma = 1e4;
    double noise_amplitude = 0.05;
    std::uint64_t noise_seed = 0;
    Palette palette = default_palette();
  };

  SurrogateShader(const LocalVolume& vol, Options opts);
  explicit SurrogateShader(const LocalVolume& vol) : SurrogateShader(vol, Options{}) {}

  FieldSample shade(const RaySample& s) const override;
  Rgb background() const override { return opts_.palette.color(Label::sky); }

 private:
  const LocalVolume* vol_;
  Options opts_;
};

struct Model {
  HashGridConfig hash_config;
  FieldDims field_dims;
  EncoderParams encoder;
  HashGridTable table;
  FieldParams field;
  StyleCode style;

  static Model create(const HashGridConfig& hash, int hidden, std::uint64_t seed, std::uint64_t style_seed);
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }
};

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamHyper& h);

struct TrainConfig {
  int iterations = 500;
  int patch = 32;  // square patch, patch * patch rays per step
  int samples = kDefaultSamples;
  double fov_y = 1.0471975511965976;
  double lr_encoder = 5e-4;
  double lr_hash = 1e-4;
  double lr_field = 1e-4;
  double lr_discriminator = 4e-4;  // recorded, no discriminator is trained
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
  double w_mse = 10.0;
  double w_gan = 0.5;          // recorded, inactive
  double w_perceptual = 10.0;  // recorded, inactive
  std::uint64_t seed = 1;
  std::uint64_t style_seed = 0;
  int n_w = 128;
  int h_w = 128;
  int hidden = 64;
  // Reuse the first step's view and stratification seed on every step.
  bool fixed_view = false;
  HashGridConfig hash = HashGridConfig::desk();
  RejectionPolicy policy = RejectionPolicy::defaults(128);

  int rays_per_step() const { return patch * patch; }
  void validate() const;
};

struct Checkpoint {
  TrainConfig config;
  Model model;
  AdamState adam_encoder;
  AdamState adam_hash;
  AdamState adam_field;
  std::int64_t iteration = 0;
};

// w * mean over pixels and channels of (pred - target)^2.
double compute_loss(const FrameBuffers& pred, std::span<const double> target_rgb, double weight = 10.0);

// One fixed view with its procedural target; used for gradient checks and
// inside the training loop.
struct PatchProblem {
  const World* world = nullptr;
  const LocalVolume* volume = nullptr;
  CameraPose pose;
  Intrinsics intr;
  RenderOptions render;
  std::vector<double> target;  // rgb per pixel
  double mse_weight = 10.0;

  static PatchProblem make(const World& world, const LocalVolume& vol, const CameraPose& pose,
                           const Intrinsics& intr, const RenderOptions& render, double mse_weight);
};

struct ModelGradients {
  double loss = 0.0;
  std::vector<double> encoder;
  std::vector<double> table;
  std::vector<double> field;
  std::vector<double> feature_field;  // d loss / d f_s field values
};

// Forward loss; `field_override` replaces the encoder output when given.
double patch_loss(const Model& model, const PatchProblem& problem, const FeatureField* field_override = nullptr);
ModelGradients patch_gradients(const Model& model, const PatchProblem& problem);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> losses;
};

using TrainObserver = std::function<void(std::int64_t iteration, double loss)>;

Checkpoint initial_checkpoint(const TrainConfig& config);

// Runs config.iterations steps on `world`, resuming from `start` when given.
TrainResult train_toy(const TrainConfig& config, const World& world, const TrainObserver& observer = {},
                      const Checkpoint* start = nullptr);

bool all_finite(std::span<const double> v);

}  // namespace bevscape
