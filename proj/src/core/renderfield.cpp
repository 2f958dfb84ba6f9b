// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/renderfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace bevscape {

namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

double silu(double v) { return v * logistic(v); }

double silu_grad(double v) {
  const double s = logistic(v);
  return s * (1.0 + v * (1.0 - s));
}

// y = W x + b for row-major W [rows][cols].
void affine(const double* w, const double* b, std::span<const double> x, int rows, std::vector<double>& y) {
  const int cols = static_cast<int>(x.size());
  y.resize(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const double* row = w + static_cast<std::size_t>(r) * cols;
    double acc = b[r];
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

StyleCode StyleCode::sample(std::uint64_t seed) {
  StyleCode s;
  Rng rng(hash_combine(seed, 0x5354594cull));
  for (double& v : s.z) v = rng.normal();
  return s;
}

StyleCode StyleCode::lerp(const StyleCode& a, const StyleCode& b, double t) {
  StyleCode s;
  for (int k = 0; k < kStyleDim; ++k) s.z[k] = (1.0 - t) * a.z[k] + t * b.z[k];
  return s;
}

FieldParams::FieldParams(const FieldDims& dims) : dims_(dims) {
  require(dims.feature_dim >= 1 && dims.hidden >= 1 && dims.layers >= 1 && dims.embed >= 0 && dims.map_hidden >= 1,
          "invalid field dimensions");
  std::size_t off = 0;
  auto take = [&off](std::size_t count) {
    const std::size_t at = off;
    off += count;
    return at;
  };
  const auto H = static_cast<std::size_t>(dims.hidden);
  offsets_.map_w0 = take(static_cast<std::size_t>(dims.map_hidden) * kStyleDim);
  offsets_.map_b0 = take(static_cast<std::size_t>(dims.map_hidden));
  offsets_.map_w1 = take(static_cast<std::size_t>(dims.modulation_dim()) * dims.map_hidden);
  offsets_.map_b1 = take(static_cast<std::size_t>(dims.modulation_dim()));
  offsets_.embed = take(static_cast<std::size_t>(kNumLabels) * dims.embed);
  for (int l = 0; l < dims.layers; ++l) {
    const std::size_t in = l == 0 ? static_cast<std::size_t>(dims.input_dim()) : H;
    offsets_.w.push_back(take(H * in));
    offsets_.b.push_back(take(H));
  }
  offsets_.w_rgb = take(3 * H);
  offsets_.b_rgb = take(3);
  offsets_.w_sigma = take(H);
  offsets_.b_sigma = take(1);
  offsets_.total = off;
  values_.assign(off, 0.0);
}

FieldParams FieldParams::random(const FieldDims& dims, std::uint64_t seed) {
  FieldParams p(dims);
  Rng rng(seed);
  auto fill = [&](std::size_t at, std::size_t rows, std::size_t cols, double gain) {
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (std::size_t k = 0; k < rows * cols; ++k) p.values_[at + k] = rng.uniform(-bound, bound);
  };
  const auto& o = p.offsets_;
  const auto H = static_cast<std::size_t>(dims.hidden);
  fill(o.map_w0, dims.map_hidden, kStyleDim, 1.0);
  // Small modulation at initialization keeps scales near 1.
  fill(o.map_w1, dims.modulation_dim(), dims.map_hidden, 0.1);
  for (std::size_t k = 0; k < static_cast<std::size_t>(kNumLabels) * dims.embed; ++k)
    p.values_[o.embed + k] = rng.normal();
  for (int l = 0; l < dims.layers; ++l)
    fill(o.w[l], H, l == 0 ? static_cast<std::size_t>(dims.input_dim()) : H, 1.0);
  fill(o.w_rgb, 3, H, 1.0);
  fill(o.w_sigma, 1, H, 1.0);
  return p;
}

Rgb Modulation::sky() const {
  const std::size_t base = static_cast<std::size_t>(layers) * 2 * hidden;
  return {logistic(raw[base]), logistic(raw[base + 1]), logistic(raw[base + 2])};
}

Modulation style_map(const StyleCode& z, const FieldParams& params) {
  const FieldDims& d = params.dims();
  const auto& o = params.offsets();
  const double* v = params.values().data();
  std::vector<double> h;
  affine(v + o.map_w0, v + o.map_b0, z.z, d.map_hidden, h);
  for (double& x : h) x = std::tanh(x);
  Modulation m;
  m.hidden = d.hidden;
  m.layers = d.layers;
  affine(v + o.map_w1, v + o.map_b1, h, d.modulation_dim(), m.raw);
  return m;
}

void style_map_backward(const StyleCode& z, const FieldParams& params, std::span<const double> d_raw,
                        std::span<double> d_params) {
  const FieldDims& d = params.dims();
  const auto& o = params.offsets();
  const double* v = params.values().data();
  std::vector<double> h;
  affine(v + o.map_w0, v + o.map_b0, z.z, d.map_hidden, h);
  for (double& x : h) x = std::tanh(x);

  const int M = d.modulation_dim();
  std::vector<double> d_h(static_cast<std::size_t>(d.map_hidden), 0.0);
  for (int r = 0; r < M; ++r) {
    const double g = d_raw[r];
    if (g == 0.0) continue;
    d_params[o.map_b1 + r] += g;
    const std::size_t row = o.map_w1 + static_cast<std::size_t>(r) * d.map_hidden;
    for (int c = 0; c < d.map_hidden; ++c) {
      d_params[row + c] += g * h[c];
      d_h[c] += g * v[row + c];
    }
  }
  for (int r = 0; r < d.map_hidden; ++r) {
    const double g = d_h[r] * (1.0 - h[r] * h[r]);
    d_params[o.map_b0 + r] += g;
    const std::size_t row = o.map_w0 + static_cast<std::size_t>(r) * kStyleDim;
    for (int c = 0; c < kStyleDim; ++c) d_params[row + c] += g * z.z[c];
  }
}

FieldSample field_eval(std::span<const double> f_x, Label label, const Modulation& mod, const FieldParams& params,
                       FieldTape* tape) {
  const FieldDims& d = params.dims();
  require(f_x.size() == static_cast<std::size_t>(d.feature_dim), "feature length does not match the field");
  if (label == Label::sky) return {mod.sky(), 0.0};

  const auto& o = params.offsets();
  const double* v = params.values().data();
  FieldTape local;
  FieldTape& t = tape ? *tape : local;
  t.input.assign(f_x.begin(), f_x.end());
  const double* emb = v + o.embed + static_cast<std::size_t>(label) * d.embed;
  t.input.insert(t.input.end(), emb, emb + d.embed);
  t.pre.resize(static_cast<std::size_t>(d.layers));
  t.mid.resize(static_cast<std::size_t>(d.layers));
  t.act.resize(static_cast<std::size_t>(d.layers));

  std::span<const double> x = t.input;
  for (int l = 0; l < d.layers; ++l) {
    affine(v + o.w[l], v + o.b[l], x, d.hidden, t.pre[l]);
    t.mid[l].resize(static_cast<std::size_t>(d.hidden));
    t.act[l].resize(static_cast<std::size_t>(d.hidden));
    for (int k = 0; k < d.hidden; ++k) {
      t.mid[l][k] = mod.scale(l, k) * t.pre[l][k] + mod.shift(l, k);
      t.act[l][k] = silu(t.mid[l][k]);
    }
    x = t.act[l];
  }
  FieldSample s;
  for (int c = 0; c < 3; ++c) {
    const double* row = v + o.w_rgb + static_cast<std::size_t>(c) * d.hidden;
    double acc = v[o.b_rgb + c];
    for (int k = 0; k < d.hidden; ++k) acc += row[k] * x[k];
    t.rgb_pre[c] = acc;
    s.rgb[c] = logistic(acc);
  }
  double acc = v[o.b_sigma];
  for (int k = 0; k < d.hidden; ++k) acc += v[o.w_sigma + k] * x[k];
  t.sigma_pre = acc;
  s.sigma = softplus(acc);
  return s;
}

void field_eval_backward(const FieldTape& t, Label label, const Modulation& mod, const FieldParams& params,
                         const Rgb& d_rgb, double d_sigma, std::span<double> d_params, std::span<double> d_raw,
                         std::span<double> d_fx) {
  const FieldDims& d = params.dims();
  const auto& o = params.offsets();
  const double* v = params.values().data();
  const int H = d.hidden;
  const std::vector<double>& top = t.act[d.layers - 1];

  std::vector<double> g(static_cast<std::size_t>(H), 0.0);
  for (int c = 0; c < 3; ++c) {
    const double s = logistic(t.rgb_pre[c]);
    const double gp = d_rgb[c] * s * (1.0 - s);
    if (gp == 0.0) continue;
    d_params[o.b_rgb + c] += gp;
    const std::size_t row = o.w_rgb + static_cast<std::size_t>(c) * H;
    for (int k = 0; k < H; ++k) {
      d_params[row + k] += gp * top[k];
      g[k] += gp * v[row + k];
    }
  }
  {
    const double gp = d_sigma * logistic(t.sigma_pre);
    d_params[o.b_sigma] += gp;
    for (int k = 0; k < H; ++k) {
      d_params[o.w_sigma + k] += gp * top[k];
      g[k] += gp * v[o.w_sigma + k];
    }
  }

  std::vector<double> g_in;
  for (int l = d.layers - 1; l >= 0; --l) {
    const std::vector<double>& in = l == 0 ? t.input : t.act[l - 1];
    const int cols = static_cast<int>(in.size());
    g_in.assign(static_cast<std::size_t>(cols), 0.0);
    const std::size_t mod_base = static_cast<std::size_t>(l) * 2 * H;
    for (int k = 0; k < H; ++k) {
      const double g_mid = g[k] * silu_grad(t.mid[l][k]);
      if (g_mid == 0.0) continue;
      d_raw[mod_base + k] += g_mid * t.pre[l][k];
      d_raw[mod_base + H + k] += g_mid;
      const double g_pre = g_mid * mod.scale(l, k);
      d_params[o.b[l] + k] += g_pre;
      const std::size_t row = o.w[l] + static_cast<std::size_t>(k) * cols;
      for (int c = 0; c < cols; ++c) {
        d_params[row + c] += g_pre * in[c];
        g_in[c] += g_pre * v[row + c];
      }
    }
    g.swap(g_in);
  }
  // g now holds d / d input = [f_x, embedding(label)].
  for (int c = 0; c < d.feature_dim; ++c) d_fx[c] = g[c];
  const std::size_t emb = o.embed + static_cast<std::size_t>(label) * d.embed;
  for (int c = 0; c < d.embed; ++c) d_params[emb + c] += g[d.feature_dim + c];
}

FrameBuffers::FrameBuffers(int w, int h)
    : width(w),
      height(h),
      rgb(3 * static_cast<std::size_t>(w) * h, 0.0),
      depth(static_cast<std::size_t>(w) * h, 0.0),
      label_dist(static_cast<std::size_t>(kNumLabels) * w * h, 0.0),
      residual(static_cast<std::size_t>(w) * h, 1.0) {}

std::array<double, kNumLabels> FrameBuffers::effective_labels(std::size_t pixel) const {
  std::array<double, kNumLabels> out{};
  for (int l = 0; l < kNumLabels; ++l) out[l] = label_dist[pixel * kNumLabels + l];
  out[static_cast<int>(Label::sky)] += residual[pixel];
  return out;
}

bool window_interval(const LocalVolume& vol, const Ray& ray, double& t_near, double& t_far) {
  const double hi[3] = {static_cast<double>(vol.n_w()), static_cast<double>(vol.n_w()),
                        static_cast<double>(vol.h_w())};
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < 0.0 || o > hi[a]) return false;
      continue;
    }
    double ta = (0.0 - o) / d;
    double tb = (hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  t_near = t0;
  t_far = t1;
  return t1 > t0;
}

std::vector<RaySample> stratified_samples(const LocalVolume& vol, const Ray& ray, int n_samples, double t_near,
                                          double t_far, std::uint64_t seed) {
  require(n_samples >= 1, "at least one sample per ray is required");
  require(t_near < t_far, "ray interval must satisfy t_near < t_far");
  std::vector<RaySample> out(static_cast<std::size_t>(n_samples));
  const double step = (t_far - t_near) / n_samples;
  for (int i = 0; i < n_samples; ++i) {
    const double u = unit_from_bits(hash_combine(seed, static_cast<std::uint64_t>(i)));
    out[i].t = t_near + (i + u) * step;
  }
  for (int i = 0; i < n_samples; ++i) {
    out[i].delta = (i + 1 < n_samples ? out[i + 1].t : t_far) - out[i].t;
    out[i].p = ray.at(out[i].t);
    out[i].voxel = query_voxel(vol, out[i].p);
  }
  return out;
}

RayResult composite(std::span<const RaySample> samples, std::span<const FieldSample> shaded, const Rgb& background,
                    double t_far, std::vector<double>* weights) {
  RayResult r;
  double T = 1.0;
  if (weights) weights->assign(samples.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].voxel.occupied) continue;
    const double sigma = shaded[i].sigma;
    const double trans = std::exp(-sigma * samples[i].delta);
    const double w = T * (1.0 - trans);
    for (int c = 0; c < 3; ++c) r.rgb[c] += w * shaded[i].rgb[c];
    r.depth += w * samples[i].t;
    r.label_dist[static_cast<int>(samples[i].voxel.label)] += w;
    r.weight_sum += w;
    if (weights) (*weights)[i] = w;
    T *= trans;
  }
  for (int c = 0; c < 3; ++c) r.rgb[c] += T * background[c];
  r.depth += T * t_far;
  r.residual = T;
  return r;
}

FieldSample NeuralShader::shade(const RaySample& s) const {
  thread_local std::vector<double> features;
  const Vec3 g = to_global(scene_.world_n(), scene_.volume->window, s.p);
  const auto f_s = sample_feature(*scene_.field, {g.x, g.y});
  features.resize(static_cast<std::size_t>(scene_.table->config().feature_dim()));
  encode(g, f_s, *scene_.table, features);
  return field_eval(features, s.voxel.label, *scene_.modulation, *scene_.params);
}

RayResult render_ray(const LocalVolume& vol, const SampleShader& shader, const Ray& ray, const RaySampling& sampling) {
  double t_near = sampling.t_near, t_far = sampling.t_far;
  if (!sampling.explicit_range && !window_interval(vol, ray, t_near, t_far)) {
    RayResult miss;
    miss.rgb = shader.background();
    miss.label_dist.fill(0.0);
    return miss;
  }
  const std::vector<RaySample> samples = stratified_samples(vol, ray, sampling.n_samples, t_near, t_far, sampling.seed);
  std::vector<FieldSample> shaded(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].voxel.occupied) shaded[i] = shader.shade(samples[i]);
  return composite(samples, shaded, shader.background(), t_far);
}

RayResult render_ray(const NeuralScene& scene, const Ray& ray, const RaySampling& sampling) {
  return render_ray(*scene.volume, NeuralShader(scene), ray, sampling);
}

std::uint64_t pixel_seed(std::uint64_t frame_seed, std::size_t pixel) {
  return hash_combine(frame_seed, static_cast<std::uint64_t>(pixel));
}

FrameBuffers render_frame(const CameraPose& pose, const Intrinsics& intr, const LocalVolume& vol,
                          const SampleShader& shader, const RenderOptions& opts) {
  intr.validate();
  FrameBuffers fb(intr.width, intr.height);
  auto render_row = [&](int py) {
    for (int px = 0; px < intr.width; ++px) {
      const std::size_t pix = static_cast<std::size_t>(py) * intr.width + px;
      RaySampling s;
      s.n_samples = opts.n_samples;
      s.seed = pixel_seed(opts.seed, pix);
      const RayResult r = render_ray(vol, shader, cast_pixel_ray(pose, intr, px, py), s);
      for (int c = 0; c < 3; ++c) fb.rgb[pix * 3 + c] = r.rgb[c];
      fb.depth[pix] = r.depth;
      for (int l = 0; l < kNumLabels; ++l) fb.label_dist[pix * kNumLabels + l] = r.label_dist[l];
      fb.residual[pix] = r.residual;
    }
  };
  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, intr.height);
  if (threads == 1) {
    for (int py = 0; py < intr.height; ++py) render_row(py);
    return fb;
  }
  std::atomic<int> next_row{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int py = next_row++; py < intr.height; py = next_row++) render_row(py);
    });
  for (auto& th : pool) th.join();
  return fb;
}

void SceneGradients::reset(const NeuralScene& scene) {
  table.assign(scene.table->entries().size(), 0.0);
  params.assign(scene.params->values().size(), 0.0);
  modulation.assign(scene.modulation->raw.size(), 0.0);
  feature_field.assign(scene.field->values.size(), 0.0);
}

namespace {

RayResult ray_forward_backward(const NeuralScene& scene, const Ray& ray, const RaySampling& sampling,
                               const std::function<Rgb(const Rgb&)>& d_rgb_of, SceneGradients& grads) {
  const LocalVolume& vol = *scene.volume;
  const Rgb sky = scene.modulation->sky();
  double t_near = sampling.t_near, t_far = sampling.t_far;
  const std::size_t sky_base = scene.modulation->raw.size() - 3;
  if (!sampling.explicit_range && !window_interval(vol, ray, t_near, t_far)) {
    RayResult miss;
    miss.rgb = sky;
    const Rgb d = d_rgb_of(miss.rgb);
    for (int c = 0; c < 3; ++c) grads.modulation[sky_base + c] += d[c] * sky[c] * (1.0 - sky[c]);
    return miss;
  }
  const std::vector<RaySample> samples = stratified_samples(vol, ray, sampling.n_samples, t_near, t_far, sampling.seed);
  const std::size_t n = samples.size();
  const int F = scene.table->config().feature_dim();

  std::vector<FieldSample> shaded(n);
  std::vector<FieldTape> tapes(n);
  std::vector<Vec3> global(n);
  std::vector<std::array<double, 2>> feats(n);
  std::vector<double> fx(static_cast<std::size_t>(F));
  for (std::size_t i = 0; i < n; ++i) {
    if (!samples[i].voxel.occupied) continue;
    global[i] = to_global(scene.world_n(), vol.window, samples[i].p);
    feats[i] = sample_feature(*scene.field, {global[i].x, global[i].y});
    encode(global[i], feats[i], *scene.table, fx);
    shaded[i] = field_eval(fx, samples[i].voxel.label, *scene.modulation, *scene.params, &tapes[i]);
  }
  std::vector<double> weights;
  const RayResult result = composite(samples, shaded, sky, t_far, &weights);
  const Rgb d = d_rgb_of(result.rgb);

  // Suffix sum of <c_j, d> w_j for j > i plus the background term.
  double suffix = result.residual * (sky[0] * d[0] + sky[1] * d[1] + sky[2] * d[2]);
  for (int c = 0; c < 3; ++c) grads.modulation[sky_base + c] += result.residual * d[c] * sky[c] * (1.0 - sky[c]);

  // Transmittance after each sample, rebuilt front to back.
  std::vector<double> t_after(n, 1.0);
  {
    double T = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (samples[i].voxel.occupied) T *= std::exp(-shaded[i].sigma * samples[i].delta);
      t_after[i] = T;
    }
  }
  std::vector<double> d_fx(static_cast<std::size_t>(F));
  for (std::size_t ii = n; ii-- > 0;) {
    if (!samples[ii].voxel.occupied) continue;
    const double cd = shaded[ii].rgb[0] * d[0] + shaded[ii].rgb[1] * d[1] + shaded[ii].rgb[2] * d[2];
    const double d_sigma = samples[ii].delta * (t_after[ii] * cd - suffix);
    const Rgb d_c{weights[ii] * d[0], weights[ii] * d[1], weights[ii] * d[2]};
    suffix += weights[ii] * cd;

    field_eval_backward(tapes[ii], samples[ii].voxel.label, *scene.modulation, *scene.params, d_c, d_sigma,
                        grads.params, grads.modulation, d_fx);
    const auto d_feat = encode_backward_into(global[ii], feats[ii], *scene.table, d_fx, grads.table);
    const FeatureStencil st = feature_stencil(scene.field->m, {global[ii].x, global[ii].y});
    for (int k = 0; k < 4; ++k)
      for (int c = 0; c < 2; ++c) grads.feature_field[st.node[k] * 2 + c] += st.weight[k] * d_feat[c];
  }
  return result;
}

}  // namespace

void render_ray_backward(const NeuralScene& scene, const Ray& ray, const RaySampling& sampling, const Rgb& d_rgb,
                         SceneGradients& grads) {
  ray_forward_backward(
      scene, ray, sampling, [&d_rgb](const Rgb&) { return d_rgb; }, grads);
}

void render_frame_backward(const NeuralScene& scene, const CameraPose& pose, const Intrinsics& intr,
                           const RenderOptions& opts, const std::function<Rgb(std::size_t, const Rgb&)>& d_rgb,
                           SceneGradients& grads) {
  intr.validate();
  for (int py = 0; py < intr.height; ++py) {
    for (int px = 0; px < intr.width; ++px) {
      const std::size_t pix = static_cast<std::size_t>(py) * intr.width + px;
      RaySampling s;
      s.n_samples = opts.n_samples;
      s.seed = pixel_seed(opts.seed, pix);
      ray_forward_backward(
          scene, cast_pixel_ray(pose, intr, px, py), s, [&](const Rgb& rgb) { return d_rgb(pix, rgb); }, grads);
    }
  }
}

}  // namespace bevscape
