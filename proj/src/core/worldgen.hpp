// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Procedural bird's-eye-view terrain: signed height map, climate driven biome
// map and a regularized semantic label map.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/common.hpp"

namespace bevscape {

struct WorldParams {
  std::uint64_t seed = 0;
  int lod_n = 512;
  int octaves_low = 3;
  int octaves_high = 7;
  double base_frequency = 4.0;  // cycles per world extent
  int biome_octaves = 2;
  int voronoi_cells = 64;
  int lloyd_iters = 3;

  // Defaults scaled for a given side length: (n/64)^2 Voronoi cells.
  static WorldParams defaults(int n, std::uint64_t seed = 0);
  void validate() const;
};

struct HeightMap {
  Grid2<double> heights;  // signed elevation in [-1, 1], 0 is sea level
  int n() const { return heights.n; }
};

struct BiomeMap {
  Grid2<Biome> biomes;
  Grid2<double> temperature;
  Grid2<double> precipitation;
  int n() const { return biomes.n; }
};

inline constexpr int kLutSize = 256;

struct BiomeLut {
  std::vector<Biome> table = std::vector<Biome>(kLutSize * kLutSize, Biome::grassland);
  Biome at(int t, int p) const { return table[static_cast<std::size_t>(t) * kLutSize + p]; }
  Biome& at(int t, int p) { return table[static_cast<std::size_t>(t) * kLutSize + p]; }
  bool operator==(const BiomeLut&) const = default;
};

// Per-biome categorical distribution over the 12 labels.
struct LabelRules {
  std::array<std::array<double, kNumLabels>, kNumBiomes> probs{};
  bool operator==(const LabelRules&) const = default;
};

struct SemanticMap {
  Grid2<Label> labels;
  int n() const { return labels.n; }
};

struct World {
  WorldParams params;
  HeightMap height;
  SemanticMap semantic;
  std::optional<BiomeMap> biome;  // absent for worlds loaded from disk
  int n() const { return height.n(); }
};

// 8-bit display color per label; also the base albedo of the procedural
// colorizer.
struct Palette {
  std::array<std::array<std::uint8_t, 3>, kNumLabels> colors{};
  Rgb color(Label l) const;
  bool operator==(const Palette&) const = default;
};

// Built-in tables; the shipped asset files carry the same content.
BiomeLut default_biome_lut();
LabelRules default_label_rules();
Palette default_palette();

// 2-D simplex noise in [-1, 1]; exactly 0 at integer lattice corners.
double simplex2(std::uint64_t seed, double x, double y);

// Seed used for octave k of fbm; octave 0 uses the seed itself.
std::uint64_t octave_seed(std::uint64_t seed, int k);

// Normalized fractal sum: octave k at frequency base * 2^k, amplitude 2^-k.
double fbm(std::uint64_t seed, double x, double y, int octaves, double base_frequency);

// Cubic bezier easing through (0,0) (0.4,0) (0.6,1) (1,1).
double bezier_blend(double c);

// Samples an fbm over the unit square at pixel centers (i + 0.5) / n.
Grid2<double> fbm_grid(int n, std::uint64_t seed, int octaves, double base_frequency);

HeightMap blend_heights(const Grid2<double>& low, const Grid2<double>& high, const Grid2<double>& control);
HeightMap gen_height_map(const WorldParams& params);

// Control noise in [0, 1] driving the bezier blend.
Grid2<double> height_control(const WorldParams& params);

BiomeMap biome_from_climate(Grid2<double> temperature, Grid2<double> precipitation, const BiomeLut& lut);
BiomeMap gen_biome_map(const WorldParams& params, const BiomeLut& lut);

// Per-pixel mixture sampling with water forced below sea level. No
// regularization.
SemanticMap sample_labels(const BiomeMap& biomes, const HeightMap& heights, const LabelRules& rules,
                          std::uint64_t seed);

struct VoronoiSite {
  double x = 0, y = 0;
};

// Nearest-site assignment of every pixel center; ties go to the lower index.
std::vector<int> assign_voronoi(int n, const std::vector<VoronoiSite>& sites);

// Quantization energy sum ||p - site(p)||^2 over pixel centers.
double voronoi_energy(int n, const std::vector<VoronoiSite>& sites, const std::vector<int>& owner);

struct LloydResult {
  std::vector<VoronoiSite> sites;
  std::vector<int> owner;
  std::vector<double> energies;  // energy after each assignment, iters + 1 entries
};

std::vector<VoronoiSite> random_sites(int n, int count, std::uint64_t seed);
LloydResult lloyd_relax(int n, std::vector<VoronoiSite> sites, int iters);

SemanticMap regularize_labels(const SemanticMap& labels, const HeightMap& heights, int voronoi_cells,
                              int lloyd_iters, std::uint64_t seed);

SemanticMap assemble_semantic_map(const BiomeMap& biomes, const HeightMap& heights, const LabelRules& rules,
                                  const WorldParams& params);

World generate_world(const WorldParams& params, const BiomeLut& lut, const LabelRules& rules);
World generate_world(const WorldParams& params);

}  // namespace bevscape
