// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <string_view>

#include "core/common.hpp"

namespace bevscape {
namespace {

TEST(Common, Fnv1aKnownVectors) {
  // Reference values of 64-bit FNV-1a.
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ull);
  const std::string_view a = "a";
  EXPECT_EQ(fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(a.data()), a.size())), 0xaf63dc4c8601ec8cull);
  const std::string_view foobar = "foobar";
  EXPECT_EQ(fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(foobar.data()), foobar.size())),
            0x85944171f73967e8ull);
}

TEST(Common, Mix64IsSplitmixFinalizer) {
  // First outputs of splitmix64 seeded with 0.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafull);
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ull), 0x6e789e6aa1b965f4ull);
}

TEST(Common, UnitFromBitsRange) {
  EXPECT_EQ(unit_from_bits(0), 0.0);
  EXPECT_LT(unit_from_bits(~0ull), 1.0);
  EXPECT_EQ(unit_from_bits(1ull << 63), 0.5);
}

TEST(Common, RngDeterministicAndInRange) {
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  Rng c(7);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double z = c.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Common, GridIndexing) {
  Grid2<int> g(3, 0);
  g.at(1, 2) = 5;
  EXPECT_EQ(g.data[1 * 3 + 2], 5);
  EXPECT_EQ(g.size(), 9u);
}

TEST(Common, Names) {
  EXPECT_STREQ(label_name(Label::water), "water");
  EXPECT_STREQ(biome_name(Biome::tundra), "tundra");
}

}  // namespace
}  // namespace bevscape
