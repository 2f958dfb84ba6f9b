// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/training.hpp"

#include <algorithm>
#include <cmath>

namespace bevscape {

Rgb oracle_colorize(const Palette& palette, Label label, double height_fraction, double shade_noise) {
  const Rgb base = palette.color(label);
  const double shade = 0.7 + 0.3 * height_fraction;
  Rgb out{};
  for (int c = 0; c < 3; ++c) out[c] = std::clamp(base[c] * shade + shade_noise, 0.0, 1.0);
  return out;
}

double column_noise(std::uint64_t seed, int world_i, int world_j, double amplitude) {
  const std::uint64_t h = hash_combine(hash_combine(seed ^ 0x53484144ull, static_cast<std::uint64_t>(world_i)),
                                       static_cast<std::uint64_t>(world_j));
  return amplitude * (2.0 * unit_from_bits(h) - 1.0);
}

SurrogateShader::SurrogateShader(const LocalVolume& vol, Options opts) : vol_(&vol), opts_(std::move(opts)) {}

FieldSample SurrogateShader::shade(const RaySample& s) const {
  const auto& o = vol_->window.origin;
  const int wi = o[0] + static_cast<int>(std::floor(s.p.x));
  const int wj = o[1] + static_cast<int>(std::floor(s.p.y));
  const double noise = opts_.noise_amplitude > 0.0 ? column_noise(opts_.noise_seed, wi, wj, opts_.noise_amplitude) : 0.0;
  return {oracle_colorize(opts_.palette, s.voxel.label, s.voxel.height_fraction, noise), opts_.sigma};
}

Model Model::create(const HashGridConfig& hash, int hidden, std::uint64_t seed, std::uint64_t style_seed) {
  Model m;
  m.hash_config = hash;
  m.field_dims.feature_dim = hash.feature_dim();
  m.field_dims.hidden = hidden;
  m.encoder = EncoderParams::random(hash_combine(seed, 1));
  m.table = HashGridTable::random(hash, hash_combine(seed, 2));
  m.field = FieldParams::random(m.field_dims, hash_combine(seed, 3));
  m.style = StyleCode::sample(style_seed);
  return m;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamHyper& h) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    fail(ErrorCode::dimension_mismatch, "adam: parameter, gradient and state shapes differ");
  ++state.step;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    state.m[k] = h.beta1 * state.m[k] + (1.0 - h.beta1) * g;
    state.v[k] = h.beta2 * state.v[k] + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m[k] / bc1;
    const double v_hat = state.v[k] / bc2;
    params[k] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

void TrainConfig::validate() const {
  require(iterations >= 1, "iterations must be positive");
  require(patch >= 1 && samples >= 1, "patch size and samples must be positive");
  require(lr_encoder >= 0.0 && lr_hash >= 0.0 && lr_field >= 0.0, "learning rates must be non-negative");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "adam betas must lie in [0, 1)");
  require(n_w >= 8 && n_w % 8 == 0 && h_w >= 2, "window must be at least 8 wide and a multiple of 8");
  hash.validate();
  policy.validate();
}

double compute_loss(const FrameBuffers& pred, std::span<const double> target_rgb, double weight) {
  if (target_rgb.size() != pred.rgb.size()) fail(ErrorCode::dimension_mismatch, "loss: prediction and target differ");
  double s = 0.0;
  for (std::size_t k = 0; k < pred.rgb.size(); ++k) {
    const double d = pred.rgb[k] - target_rgb[k];
    s += d * d;
  }
  return weight * s / static_cast<double>(pred.rgb.size());
}

PatchProblem PatchProblem::make(const World& world, const LocalVolume& vol, const CameraPose& pose,
                                const Intrinsics& intr, const RenderOptions& render, double mse_weight) {
  PatchProblem p;
  p.world = &world;
  p.volume = &vol;
  p.pose = pose;
  p.intr = intr;
  p.render = render;
  p.mse_weight = mse_weight;
  const FrameBuffers target = render_frame(pose, intr, vol, SurrogateShader(vol), render);
  p.target = target.rgb;
  return p;
}

double patch_loss(const Model& model, const PatchProblem& problem, const FeatureField* field_override) {
  const FeatureField field =
      field_override ? *field_override : encode_field(problem.world->height, problem.world->semantic, model.encoder);
  const Modulation mod = style_map(model.style, model.field);
  const NeuralScene scene{problem.volume, &field, &model.table, &model.field, &mod};
  const FrameBuffers fb = render_frame(problem.pose, problem.intr, *problem.volume, NeuralShader(scene), problem.render);
  return compute_loss(fb, problem.target, problem.mse_weight);
}

ModelGradients patch_gradients(const Model& model, const PatchProblem& problem) {
  EncoderTape tape;
  const FeatureField field = encode_field(problem.world->height, problem.world->semantic, model.encoder, &tape);
  const Modulation mod = style_map(model.style, model.field);
  const NeuralScene scene{problem.volume, &field, &model.table, &model.field, &mod};

  SceneGradients sg;
  sg.reset(scene);
  const double count = 3.0 * problem.intr.width * problem.intr.height;
  const double scale = 2.0 * problem.mse_weight / count;
  double loss = 0.0;
  render_frame_backward(
      scene, problem.pose, problem.intr, problem.render,
      [&](std::size_t pix, const Rgb& rgb) {
        Rgb d{};
        for (int c = 0; c < 3; ++c) {
          const double diff = rgb[c] - problem.target[pix * 3 + c];
          loss += diff * diff;
          d[c] = scale * diff;
        }
        return d;
      },
      sg);

  ModelGradients g;
  g.loss = problem.mse_weight * loss / count;
  style_map_backward(model.style, model.field, sg.modulation, sg.params);
  g.encoder.assign(EncoderParams::parameter_count(), 0.0);
  encode_field_backward(tape, model.encoder, sg.feature_field, g.encoder);
  g.table = std::move(sg.table);
  g.field = std::move(sg.params);
  g.feature_field = std::move(sg.feature_field);
  return g;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Checkpoint initial_checkpoint(const TrainConfig& config) {
  config.validate();
  Checkpoint ck;
  ck.config = config;
  ck.model = Model::create(config.hash, config.hidden, config.seed, config.style_seed);
  ck.adam_encoder = AdamState::zeros(ck.model.encoder.values().size());
  ck.adam_hash = AdamState::zeros(ck.model.table.entries().size());
  ck.adam_field = AdamState::zeros(ck.model.field.values().size());
  return ck;
}

TrainResult train_toy(const TrainConfig& config, const World& world, const TrainObserver& observer,
                      const Checkpoint* start) {
  config.validate();
  if (config.n_w > world.n()) fail(ErrorCode::invalid_argument, "training window exceeds world size");
  TrainResult res;
  res.checkpoint = start ? *start : initial_checkpoint(config);
  res.checkpoint.config = config;
  Checkpoint& ck = res.checkpoint;
  if (!(ck.model.hash_config == config.hash)) fail(ErrorCode::invalid_argument, "checkpoint hash grid config differs");

  Intrinsics intr;
  intr.width = intr.height = config.patch;
  intr.fov_y = config.fov_y;
  const bool sliding = config.n_w < world.n();
  std::optional<LocalVolume> vol;
  if (!sliding) vol = build_volume(window_at(world, {0, 0}, config.n_w, config.h_w));

  auto hyper = [&config](double lr) { return AdamHyper{lr, config.beta1, config.beta2, config.eps}; };

  for (int it = 0; it < config.iterations; ++it) {
    const std::int64_t step = ck.iteration;
    const std::uint64_t view_step = config.fixed_view ? 0 : static_cast<std::uint64_t>(step);
    Rng rng(hash_combine(config.seed, view_step));
    if (sliding) {
      const double cx = rng.uniform(0.0, world.n());
      const double cy = rng.uniform(0.0, world.n());
      vol = build_volume(crop_window(world, {cx, cy}, config.n_w, config.h_w));
    }
    const PoseSample pose = sample_pose(*vol, rng, config.policy);
    RenderOptions ropts;
    ropts.n_samples = config.samples;
    ropts.seed = hash_combine(config.seed ^ 0x52454e44ull, view_step);
    const PatchProblem problem = PatchProblem::make(world, *vol, pose.pose, intr, ropts, config.w_mse);
    const ModelGradients g = patch_gradients(ck.model, problem);
    if (!std::isfinite(g.loss) || !all_finite(g.encoder) || !all_finite(g.table) || !all_finite(g.field))
      fail(ErrorCode::runtime, "non-finite gradient at iteration " + std::to_string(step));

    adam_step(ck.model.encoder.values(), g.encoder, ck.adam_encoder, hyper(config.lr_encoder));
    adam_step(ck.model.table.entries(), g.table, ck.adam_hash, hyper(config.lr_hash));
    adam_step(ck.model.field.values(), g.field, ck.adam_field, hyper(config.lr_field));
    if (!all_finite(ck.model.encoder.values()) || !all_finite(ck.model.table.entries()) ||
        !all_finite(ck.model.field.values()))
      fail(ErrorCode::runtime, "non-finite parameter after iteration " + std::to_string(step));

    ++ck.iteration;
    res.losses.push_back(g.loss);
    if (observer) observer(step, g.loss);
  }
  return res;
}

}  // namespace bevscape
