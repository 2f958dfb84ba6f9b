// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/common.hpp"
#include "core/worldgen.hpp"

namespace bevscape {

inline constexpr int kEncoderStages = 3;
inline constexpr int kEncoderInputChannels = 1 + kNumLabels;  // height + one-hot labels
inline constexpr int kSceneFeatureDim = 2;

// Three 3x3 stride-2 convolutions (13 -> 16 -> 16 -> 2), tanh between stages
// and a logistic squash at the end. Weights are stored flat, stage by stage,
// as [out][in][ky][kx] followed by the stage bias.
class EncoderParams {
 public:
  static constexpr std::array<int, kEncoderStages + 1> kChannels{kEncoderInputChannels, 16, 16, kSceneFeatureDim};

  EncoderParams();  // zeros
  static EncoderParams random(std::uint64_t seed);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  static std::size_t weight_offset(int stage);
  static std::size_t bias_offset(int stage);
  static std::size_t parameter_count();

 private:
  std::vector<double> values_;
};

struct FeatureField {
  int m = 0;
  std::vector<double> values;  // m x m x 2, (a * m + b) * 2 + c

  std::array<double, 2> at(int a, int b) const {
    const std::size_t o = (static_cast<std::size_t>(a) * m + b) * 2;
    return {values[o], values[o + 1]};
  }
};

// Intermediate activations kept for the backward pass.
struct EncoderTape {
  int n = 0;
  std::array<std::vector<double>, kEncoderStages + 1> activations;  // stage inputs, then final output
};

std::vector<double> encoder_input(const HeightMap& heights, const SemanticMap& labels);

FeatureField encode_field(const HeightMap& heights, const SemanticMap& labels, const EncoderParams& params,
                          EncoderTape* tape = nullptr);

// Accumulates d loss / d params given d loss / d field values.
void encode_field_backward(const EncoderTape& tape, const EncoderParams& params, std::span<const double> d_field,
                           std::span<double> d_params);

struct FeatureStencil {
  std::array<std::size_t, 4> node{};  // node index a * m + b
  std::array<double, 4> weight{};
};

// Bilinear stencil over cell-centered nodes at ((a + 0.5) / m, (b + 0.5) / m),
// clamped at the border.
FeatureStencil feature_stencil(int m, std::array<double, 2> xy_global);
std::array<double, 2> sample_feature(const FeatureField& field, std::array<double, 2> xy_global);

}  // namespace bevscape
