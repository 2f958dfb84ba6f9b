// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/common.hpp"

#include <numbers>

namespace bevscape {

const char* label_name(Label l) {
  static constexpr const char* kNames[kNumLabels] = {"sky",   "tree", "dirt", "flower", "grass", "gravel",
                                                     "water", "rock", "stone", "sand",  "snow",  "others"};
  const auto idx = static_cast<int>(l);
  return idx < kNumLabels ? kNames[idx] : "invalid";
}

const char* biome_name(Biome b) {
  static constexpr const char* kNames[kNumBiomes] = {"desert",      "savanna", "woodland",         "tundra",   "seasonal_forest",
                                                     "rain_forest", "taiga",   "temperate_forest", "grassland"};
  const auto idx = static_cast<int>(b);
  return idx < kNumBiomes ? kNames[idx] : "invalid";
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= 0x100000001b3ull;
  }
  return state;
}

double Rng::normal() {
  // Box-Muller; u1 is shifted away from zero so log() stays finite.
  const double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace bevscape
