// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "core/encoder.hpp"
#include "test_support.hpp"

namespace bevscape {
namespace {

using testing::expect_golden;
using testing::hash_doubles;

World noise_world(int n, std::uint64_t seed) {
  World w;
  w.height.heights = Grid2<double>(n);
  w.semantic.labels = Grid2<Label>(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < w.height.heights.size(); ++k) {
    w.height.heights.data[k] = rng.uniform(-1, 1);
    w.semantic.labels.data[k] = static_cast<Label>(rng.below(kNumLabels));
  }
  return w;
}

TEST(Encoder, ParameterLayout) {
  // 13->16, 16->16, 16->2 with 3x3 kernels plus biases.
  EXPECT_EQ(EncoderParams::parameter_count(), 16u * 13 * 9 + 16 + 16 * 16 * 9 + 16 + 2 * 16 * 9 + 2);
  EXPECT_EQ(EncoderParams::weight_offset(0), 0u);
  EXPECT_EQ(EncoderParams::bias_offset(0), 16u * 13 * 9);
}

TEST(Encoder, ZeroWeightsGiveHalf) {
  const World w = noise_world(32, 1);
  const FeatureField f = encode_field(w.height, w.semantic, EncoderParams{});
  EXPECT_EQ(f.m, 4);
  for (double v : f.values) EXPECT_EQ(v, 0.5);
}

TEST(Encoder, RejectsBadSide) {
  const World w = noise_world(12, 1);
  EXPECT_THROW(encode_field(w.height, w.semantic, EncoderParams{}), Error);
}

TEST(Encoder, OutputsInUnitSquare) {
  const World w = noise_world(64, 2);
  EncoderParams p = EncoderParams::random(3);
  for (double& v : p.values()) v *= 10.0;
  const FeatureField f = encode_field(w.height, w.semantic, p);
  for (double v : f.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Encoder, TranslationByEightShiftsOneCell) {
  const int n = 64;
  const World w = noise_world(n, 4);
  World shifted = noise_world(n, 5);  // rows past the shift keep unrelated content
  for (int i = 0; i + 8 < n; ++i)
    for (int j = 0; j < n; ++j) {
      shifted.height.heights.at(i, j) = w.height.heights.at(i + 8, j);
      shifted.semantic.labels.at(i, j) = w.semantic.labels.at(i + 8, j);
    }
  const EncoderParams p = EncoderParams::random(6);
  const FeatureField a = encode_field(w.height, w.semantic, p);
  const FeatureField b = encode_field(shifted.height, shifted.semantic, p);
  // Cell a covers input rows 8a - 7 .. 8a + 7, so rows 1 .. m - 2 of the
  // shifted field see neither padding nor the replaced rows.
  for (int r = 1; r <= a.m - 2; ++r)
    for (int c = 0; c < a.m; ++c) {
      EXPECT_EQ(b.at(r, c)[0], a.at(r + 1, c)[0]);
      EXPECT_EQ(b.at(r, c)[1], a.at(r + 1, c)[1]);
    }
}

TEST(Encoder, GoldenOutput) {
  const World w = generate_world(WorldParams::defaults(64, 7));
  const FeatureField f = encode_field(w.height, w.semantic, EncoderParams::random(11));
  expect_golden("encoder_field_n64_seed7_w11", hash_doubles(f.values));
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  const World w = noise_world(16, 8);
  EncoderParams p = EncoderParams::random(9);
  Rng rng(10);
  for (std::size_t k = EncoderParams::bias_offset(0); k < EncoderParams::weight_offset(1); ++k) p.values()[k] = rng.uniform(-0.3, 0.3);
  for (std::size_t k = EncoderParams::bias_offset(2); k < EncoderParams::parameter_count(); ++k) p.values()[k] = rng.uniform(-0.3, 0.3);
  EncoderTape tape;
  const FeatureField f = encode_field(w.height, w.semantic, p, &tape);
  std::vector<double> r(f.values.size());
  for (double& v : r) v = rng.uniform(-1, 1);
  auto loss = [&](const EncoderParams& q) {
    const FeatureField g = encode_field(w.height, w.semantic, q);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * g.values[k];
    return s;
  };
  std::vector<double> grad(EncoderParams::parameter_count(), 0.0);
  encode_field_backward(tape, p, r, grad);
  const double h = 1e-5;
  for (int t = 0; t < 60; ++t) {
    const std::size_t k = rng.below(EncoderParams::parameter_count());
    EncoderParams plus = p, minus = p;
    plus.values()[k] += h;
    minus.values()[k] -= h;
    const double fd = (loss(plus) - loss(minus)) / (2 * h);
    EXPECT_LT(std::abs(fd - grad[k]), 1e-4 * std::max(std::abs(fd), 1e-3)) << "param " << k;
  }
}

TEST(SampleFeature, ConstantField) {
  FeatureField f;
  f.m = 4;
  f.values.assign(32, 0.0);
  for (int k = 0; k < 16; ++k) f.values[2 * k] = 0.3, f.values[2 * k + 1] = 0.8;
  Rng rng(1);
  for (int q = 0; q < 100; ++q) {
    const auto v = sample_feature(f, {rng.uniform(), rng.uniform()});
    EXPECT_NEAR(v[0], 0.3, 1e-15);
    EXPECT_NEAR(v[1], 0.8, 1e-15);
  }
}

FeatureField random_field(int m, std::uint64_t seed) {
  FeatureField f;
  f.m = m;
  f.values.resize(static_cast<std::size_t>(m) * m * 2);
  Rng rng(seed);
  for (double& v : f.values) v = rng.uniform();
  return f;
}

TEST(SampleFeature, NodeValues) {
  const FeatureField f = random_field(8, 2);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      const auto v = sample_feature(f, {(a + 0.5) / 8, (b + 0.5) / 8});
      EXPECT_EQ(v, f.at(a, b));
    }
}

TEST(SampleFeature, MatchesBilinearOracle) {
  const int m = 8;
  const FeatureField f = random_field(m, 3);
  Rng rng(4);
  for (int q = 0; q < 10000; ++q) {
    const double x = rng.uniform(), y = rng.uniform();
    // Clamp to the node hull, then interpolate between the two nearest nodes.
    const double u = std::clamp(x * m - 0.5, 0.0, m - 1.0), v = std::clamp(y * m - 0.5, 0.0, m - 1.0);
    const int a = std::min(static_cast<int>(u), m - 2), b = std::min(static_cast<int>(v), m - 2);
    const double fu = u - a, fv = v - b;
    for (int c = 0; c < 2; ++c) {
      const double oracle = (1 - fu) * (1 - fv) * f.at(a, b)[c] + (1 - fu) * fv * f.at(a, b + 1)[c] +
                            fu * (1 - fv) * f.at(a + 1, b)[c] + fu * fv * f.at(a + 1, b + 1)[c];
      EXPECT_NEAR(sample_feature(f, {x, y})[c], oracle, 1e-12);
    }
  }
}

}  // namespace
}  // namespace bevscape
