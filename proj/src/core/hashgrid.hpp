// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multiresolution hash encoding over the 5-D space (scene feature, position).
// Each level scales all five coordinates by the same resolution, gathers the
// 32 corners of the enclosing hypercube through a spatial XOR hash and blends
// them 5-linearly.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/common.hpp"

namespace bevscape {

inline constexpr int kHashDims = 5;
inline constexpr int kHashCorners = 1 << kHashDims;

struct HashGridConfig {
  int levels = 16;
  std::uint32_t table_size = 1u << 19;
  int channels = 8;
  int n_min = 16;
  int n_max = 2048;
  // Paired with the coordinate order (f_s^1, f_s^2, x, y, z).
  std::array<std::uint32_t, kHashDims> primes{1u, 2654435761u, 805459861u, 3674653429u, 2097192037u};

  void validate() const;
  int feature_dim() const { return levels * channels; }
  std::size_t entry_count() const { return static_cast<std::size_t>(levels) * table_size * channels; }
  bool operator==(const HashGridConfig&) const = default;

  // Reduced configuration used for desk-scale rendering and training.
  static HashGridConfig desk();
};

class HashGridTable {
 public:
  HashGridTable() = default;
  explicit HashGridTable(const HashGridConfig& config);  // zero-filled

  // Uniform initialization in [-1e-4, 1e-4].
  static HashGridTable random(const HashGridConfig& config, std::uint64_t seed);

  const HashGridConfig& config() const { return config_; }
  std::span<double> entries() { return entries_; }
  std::span<const double> entries() const { return entries_; }

  double& entry(int level, std::uint32_t index, int channel) {
    return entries_[(static_cast<std::size_t>(level) * config_.table_size + index) * config_.channels + channel];
  }
  double entry(int level, std::uint32_t index, int channel) const {
    return entries_[(static_cast<std::size_t>(level) * config_.table_size + index) * config_.channels + channel];
  }

 private:
  HashGridConfig config_;
  std::vector<double> entries_;
};

struct HashGradEntry {
  int level = 0;
  std::uint32_t index = 0;
  int channel = 0;
  double value = 0.0;
};

struct HashGradients {
  // Unreduced per-corner contributions; the same slot may appear twice when
  // two corners of one query collide.
  std::vector<HashGradEntry> d_entries;
  std::array<double, 2> d_feat{0.0, 0.0};
};

int level_resolution(const HashGridConfig& config, int level);

using HashCorner = std::array<std::uint32_t, kHashDims>;
std::uint32_t hash_index(const HashCorner& corner, const HashGridConfig& config);

// Writes L * C features, level-major.
void encode(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table, std::span<double> out);
std::vector<double> encode(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table);

HashGradients encode_backward(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table,
                              std::span<const double> upstream);

// Dense variant used by training: adds table gradients into grad_table (same
// layout as the table entries) and returns d/d f_s.
std::array<double, 2> encode_backward_into(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table,
                                           std::span<const double> upstream, std::span<double> grad_table);

}  // namespace bevscape
