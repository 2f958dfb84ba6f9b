// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace bevscape {

namespace {

constexpr int kKernel = 3;

std::size_t stage_weight_count(int s) {
  return static_cast<std::size_t>(EncoderParams::kChannels[s + 1]) * EncoderParams::kChannels[s] * kKernel * kKernel;
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Strided 3x3 convolution with zero padding: n x n input to n/2 x n/2 output.
void conv_forward(const std::vector<double>& in, int n, int cin, int cout, const double* w, const double* bias,
                  std::vector<double>& out) {
  const int m = n / 2;
  out.assign(static_cast<std::size_t>(cout) * m * m, 0.0);
  for (int o = 0; o < cout; ++o) {
    double* dst = out.data() + static_cast<std::size_t>(o) * m * m;
    std::fill(dst, dst + static_cast<std::size_t>(m) * m, bias[o]);
    for (int c = 0; c < cin; ++c) {
      const double* src = in.data() + static_cast<std::size_t>(c) * n * n;
      const double* k = w + (static_cast<std::size_t>(o) * cin + c) * kKernel * kKernel;
      for (int a = 0; a < m; ++a) {
        for (int ky = 0; ky < kKernel; ++ky) {
          const int i = 2 * a + ky - 1;
          if (i < 0 || i >= n) continue;
          for (int b = 0; b < m; ++b) {
            double acc = 0.0;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int j = 2 * b + kx - 1;
              if (j < 0 || j >= n) continue;
              acc += k[ky * kKernel + kx] * src[static_cast<std::size_t>(i) * n + j];
            }
            dst[static_cast<std::size_t>(a) * m + b] += acc;
          }
        }
      }
    }
  }
}

// Given d/d pre-activation of the output, accumulates weight/bias gradients and
// optionally d/d input.
void conv_backward(const std::vector<double>& in, int n, int cin, int cout, const double* w,
                   const std::vector<double>& d_pre, double* d_w, double* d_bias, std::vector<double>* d_in) {
  const int m = n / 2;
  if (d_in) d_in->assign(static_cast<std::size_t>(cin) * n * n, 0.0);
  for (int o = 0; o < cout; ++o) {
    const double* g = d_pre.data() + static_cast<std::size_t>(o) * m * m;
    for (std::size_t p = 0; p < static_cast<std::size_t>(m) * m; ++p) d_bias[o] += g[p];
    for (int c = 0; c < cin; ++c) {
      const double* src = in.data() + static_cast<std::size_t>(c) * n * n;
      const std::size_t koff = (static_cast<std::size_t>(o) * cin + c) * kKernel * kKernel;
      double* dsrc = d_in ? d_in->data() + static_cast<std::size_t>(c) * n * n : nullptr;
      for (int ky = 0; ky < kKernel; ++ky) {
        for (int kx = 0; kx < kKernel; ++kx) {
          double acc = 0.0;
          const double wk = w[koff + ky * kKernel + kx];
          for (int a = 0; a < m; ++a) {
            const int i = 2 * a + ky - 1;
            if (i < 0 || i >= n) continue;
            for (int b = 0; b < m; ++b) {
              const int j = 2 * b + kx - 1;
              if (j < 0 || j >= n) continue;
              const double gv = g[static_cast<std::size_t>(a) * m + b];
              acc += gv * src[static_cast<std::size_t>(i) * n + j];
              if (dsrc) dsrc[static_cast<std::size_t>(i) * n + j] += gv * wk;
            }
          }
          d_w[koff + ky * kKernel + kx] += acc;
        }
      }
    }
  }
}

}  // namespace

EncoderParams::EncoderParams() : values_(parameter_count(), 0.0) {}

std::size_t EncoderParams::weight_offset(int stage) {
  std::size_t off = 0;
  for (int s = 0; s < stage; ++s) off += stage_weight_count(s) + kChannels[s + 1];
  return off;
}

std::size_t EncoderParams::bias_offset(int stage) { return weight_offset(stage) + stage_weight_count(stage); }

std::size_t EncoderParams::parameter_count() { return weight_offset(kEncoderStages); }

EncoderParams EncoderParams::random(std::uint64_t seed) {
  EncoderParams p;
  Rng rng(seed);
  for (int s = 0; s < kEncoderStages; ++s) {
    const double fan = (kChannels[s] + kChannels[s + 1]) * kKernel * kKernel;
    const double bound = std::sqrt(6.0 / fan);
    double* w = p.values_.data() + weight_offset(s);
    for (std::size_t k = 0; k < stage_weight_count(s); ++k) w[k] = rng.uniform(-bound, bound);
  }
  return p;
}

std::vector<double> encoder_input(const HeightMap& heights, const SemanticMap& labels) {
  if (heights.n() != labels.n()) fail(ErrorCode::dimension_mismatch, "height and label maps differ in size");
  const int n = heights.n();
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  std::vector<double> in(kEncoderInputChannels * plane, 0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    in[p] = heights.heights.data[p];
    in[(1 + static_cast<std::size_t>(labels.labels.data[p])) * plane + p] = 1.0;
  }
  return in;
}

FeatureField encode_field(const HeightMap& heights, const SemanticMap& labels, const EncoderParams& params,
                          EncoderTape* tape) {
  const int n = heights.n();
  if (n < 8 || n % 8 != 0) fail(ErrorCode::invalid_argument, "encoder input side must be a multiple of 8");
  std::vector<double> act = encoder_input(heights, labels);
  EncoderTape local;
  EncoderTape& t = tape ? *tape : local;
  t.n = n;
  const std::span<const double> w = params.values();
  int side = n;
  for (int s = 0; s < kEncoderStages; ++s) {
    std::vector<double> out;
    conv_forward(act, side, EncoderParams::kChannels[s], EncoderParams::kChannels[s + 1],
                 w.data() + EncoderParams::weight_offset(s), w.data() + EncoderParams::bias_offset(s), out);
    const bool last = s + 1 == kEncoderStages;
    for (double& v : out) v = last ? logistic(v) : std::tanh(v);
    t.activations[s] = std::move(act);
    act = std::move(out);
    side /= 2;
  }
  FeatureField field;
  field.m = side;
  field.values.resize(static_cast<std::size_t>(side) * side * kSceneFeatureDim);
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < kSceneFeatureDim; ++c) field.values[p * kSceneFeatureDim + c] = act[c * plane + p];
  t.activations[kEncoderStages] = std::move(act);
  return field;
}

void encode_field_backward(const EncoderTape& tape, const EncoderParams& params, std::span<const double> d_field,
                           std::span<double> d_params) {
  require(d_params.size() == EncoderParams::parameter_count(), "encoder gradient buffer has wrong length");
  const std::span<const double> w = params.values();
  const int m = tape.n >> kEncoderStages;
  const std::size_t plane = static_cast<std::size_t>(m) * m;
  require(d_field.size() == plane * kSceneFeatureDim, "field gradient has wrong length");

  // d/d pre-activation of the final stage (logistic).
  const std::vector<double>& out = tape.activations[kEncoderStages];
  std::vector<double> d_pre(out.size());
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < kSceneFeatureDim; ++c) {
      const double s = out[c * plane + p];
      d_pre[c * plane + p] = d_field[p * kSceneFeatureDim + c] * s * (1.0 - s);
    }

  for (int s = kEncoderStages - 1; s >= 0; --s) {
    const int side = tape.n >> s;
    std::vector<double> d_in;
    conv_backward(tape.activations[s], side, EncoderParams::kChannels[s], EncoderParams::kChannels[s + 1],
                  w.data() + EncoderParams::weight_offset(s), d_pre, d_params.data() + EncoderParams::weight_offset(s),
                  d_params.data() + EncoderParams::bias_offset(s), s > 0 ? &d_in : nullptr);
    if (s == 0) break;
    // Stage inputs past the first are tanh outputs.
    const std::vector<double>& a = tape.activations[s];
    for (std::size_t k = 0; k < d_in.size(); ++k) d_in[k] *= 1.0 - a[k] * a[k];
    d_pre = std::move(d_in);
  }
}

FeatureStencil feature_stencil(int m, std::array<double, 2> xy_global) {
  FeatureStencil st;
  std::array<int, 2> lo{};
  std::array<double, 2> frac{};
  for (int a = 0; a < 2; ++a) {
    const double u = std::clamp(std::clamp(xy_global[a], 0.0, 1.0) * m - 0.5, 0.0, static_cast<double>(m - 1));
    lo[a] = std::min(static_cast<int>(std::floor(u)), std::max(m - 2, 0));
    frac[a] = m > 1 ? u - lo[a] : 0.0;
  }
  const int hi0 = std::min(lo[0] + 1, m - 1);
  const int hi1 = std::min(lo[1] + 1, m - 1);
  st.node = {static_cast<std::size_t>(lo[0]) * m + lo[1], static_cast<std::size_t>(lo[0]) * m + hi1,
             static_cast<std::size_t>(hi0) * m + lo[1], static_cast<std::size_t>(hi0) * m + hi1};
  st.weight = {(1.0 - frac[0]) * (1.0 - frac[1]), (1.0 - frac[0]) * frac[1], frac[0] * (1.0 - frac[1]),
               frac[0] * frac[1]};
  return st;
}

std::array<double, 2> sample_feature(const FeatureField& field, std::array<double, 2> xy_global) {
  const FeatureStencil st = feature_stencil(field.m, xy_global);
  std::array<double, 2> out{0.0, 0.0};
  for (int k = 0; k < 4; ++k)
    for (int c = 0; c < 2; ++c) out[c] += st.weight[k] * field.values[st.node[k] * 2 + c];
  return out;
}

}  // namespace bevscape
