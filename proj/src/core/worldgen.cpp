// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bevscape {

namespace {

constexpr double kSkew = 0.36602540378443864676;    // (sqrt(3) - 1) / 2
constexpr double kUnskew = 0.21132486540518711775;  // (3 - sqrt(3)) / 6
// 1 / sup of the raw kernel sum for the 8-direction gradient set.
constexpr double kSimplexScale = 70.148;

constexpr std::uint64_t kTemperatureSalt = 0x54;
constexpr std::uint64_t kPrecipitationSalt = 0x50;
constexpr std::uint64_t kControlSalt = 0x4354524cull;
constexpr std::uint64_t kMixtureSalt = 0x4d495854ull;
constexpr std::uint64_t kVoronoiSalt = 0x564f524full;

constexpr double kGrad[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}};

double corner_contribution(std::uint64_t seed, std::int64_t ci, std::int64_t cj, double dx, double dy) {
  double t = 0.5 - dx * dx - dy * dy;
  if (t <= 0.0) return 0.0;
  const std::uint64_t h =
      hash_combine(hash_combine(seed, static_cast<std::uint64_t>(ci)), static_cast<std::uint64_t>(cj));
  const double* g = kGrad[h & 7u];
  t *= t;
  return t * t * (g[0] * dx + g[1] * dy);
}

}  // namespace

WorldParams WorldParams::defaults(int n, std::uint64_t seed) {
  WorldParams p;
  p.seed = seed;
  p.lod_n = n;
  p.voronoi_cells = std::max(1, (n / 64) * (n / 64));
  return p;
}

void WorldParams::validate() const {
  require(lod_n >= 16, "lod_n must be at least 16");
  require(octaves_low >= 1 && octaves_high >= 1, "octave counts must be positive");
  require(octaves_low < octaves_high, "octaves_low must be below octaves_high");
  require(base_frequency > 0.0 && std::isfinite(base_frequency), "base_frequency must be positive");
  require(biome_octaves >= 1, "biome_octaves must be positive");
  require(voronoi_cells >= 1, "voronoi_cells must be positive");
  require(lloyd_iters >= 0, "lloyd_iters must be non-negative");
}

BiomeLut default_biome_lut() {
  // Rows: temperature (cold, temperate, hot); columns: precipitation (dry, medium, wet).
  static constexpr Biome kRegions[3][3] = {
      {Biome::tundra, Biome::grassland, Biome::taiga},
      {Biome::woodland, Biome::seasonal_forest, Biome::temperate_forest},
      {Biome::desert, Biome::savanna, Biome::rain_forest},
  };
  auto band = [](int v) { return v < 108 ? 0 : (v < 148 ? 1 : 2); };
  BiomeLut lut;
  for (int t = 0; t < kLutSize; ++t)
    for (int p = 0; p < kLutSize; ++p) lut.at(t, p) = kRegions[band(t)][band(p)];
  return lut;
}

LabelRules default_label_rules() {
  LabelRules r;
  auto set = [&r](Biome b, std::initializer_list<std::pair<Label, double>> entries) {
    for (auto [label, p] : entries) r.probs[static_cast<int>(b)][static_cast<int>(label)] = p;
  };
  set(Biome::desert, {{Label::sand, 0.90}, {Label::rock, 0.07}, {Label::others, 0.03}});
  set(Biome::savanna, {{Label::grass, 0.60}, {Label::dirt, 0.20}, {Label::tree, 0.10}, {Label::sand, 0.10}});
  set(Biome::woodland, {{Label::tree, 0.40}, {Label::grass, 0.35}, {Label::dirt, 0.15}, {Label::rock, 0.10}});
  set(Biome::tundra, {{Label::grass, 0.40}, {Label::dirt, 0.25}, {Label::rock, 0.20}, {Label::stone, 0.15}});
  set(Biome::seasonal_forest,
      {{Label::tree, 0.50}, {Label::grass, 0.30}, {Label::flower, 0.10}, {Label::dirt, 0.10}});
  set(Biome::rain_forest, {{Label::tree, 0.70}, {Label::grass, 0.20}, {Label::flower, 0.10}});
  set(Biome::taiga, {{Label::tree, 0.45}, {Label::snow, 0.30}, {Label::rock, 0.15}, {Label::stone, 0.10}});
  set(Biome::temperate_forest,
      {{Label::tree, 0.55}, {Label::grass, 0.30}, {Label::dirt, 0.10}, {Label::gravel, 0.05}});
  set(Biome::grassland, {{Label::grass, 0.70}, {Label::flower, 0.15}, {Label::dirt, 0.10}, {Label::gravel, 0.05}});
  return r;
}

Rgb Palette::color(Label l) const {
  const auto& c = colors[static_cast<int>(l)];
  return {c[0] / 255.0, c[1] / 255.0, c[2] / 255.0};
}

Palette default_palette() {
  return Palette{{{
      {135, 206, 235},  // sky
      {34, 110, 40},    // tree
      {120, 85, 55},    // dirt
      {220, 120, 180},  // flower
      {95, 170, 70},    // grass
      {150, 145, 135},  // gravel
      {40, 90, 170},    // water
      {110, 105, 100},  // rock
      {170, 170, 165},  // stone
      {225, 205, 150},  // sand
      {245, 245, 250},  // snow
      {128, 128, 128},  // others
  }}};
}

double simplex2(std::uint64_t seed, double x, double y) {
  const double s = (x + y) * kSkew;
  const double fi = std::floor(x + s);
  const double fj = std::floor(y + s);
  const double t = (fi + fj) * kUnskew;
  const double x0 = x - (fi - t);
  const double y0 = y - (fj - t);
  const int i1 = x0 > y0 ? 1 : 0;
  const int j1 = 1 - i1;
  const auto ci = static_cast<std::int64_t>(fi);
  const auto cj = static_cast<std::int64_t>(fj);

  double sum = corner_contribution(seed, ci, cj, x0, y0);
  sum += corner_contribution(seed, ci + i1, cj + j1, x0 - i1 + kUnskew, y0 - j1 + kUnskew);
  sum += corner_contribution(seed, ci + 1, cj + 1, x0 - 1.0 + 2.0 * kUnskew, y0 - 1.0 + 2.0 * kUnskew);
  return std::clamp(kSimplexScale * sum, -1.0, 1.0);
}

std::uint64_t octave_seed(std::uint64_t seed, int k) {
  return seed + static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ull;
}

double fbm(std::uint64_t seed, double x, double y, int octaves, double base_frequency) {
  double sum = 0.0;
  double norm_sum = 0.0;
  double amplitude = 1.0;
  double frequency = base_frequency;
  for (int k = 0; k < octaves; ++k) {
    sum += amplitude * simplex2(octave_seed(seed, k), x * frequency, y * frequency);
    norm_sum += amplitude;
    amplitude *= 0.5;
    frequency *= 2.0;
  }
  return sum / norm_sum;
}

double bezier_blend(double c) {
  if (c <= 0.0) return 0.0;
  if (c >= 1.0) return 1.0;
  // x(s) is strictly increasing on [0, 1]; invert it by bisection.
  auto bx = [](double s) {
    const double u = 1.0 - s;
    return 3.0 * u * u * s * 0.4 + 3.0 * u * s * s * 0.6 + s * s * s;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bx(mid) < c ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  return 3.0 * (1.0 - s) * s * s + s * s * s;
}

Grid2<double> fbm_grid(int n, std::uint64_t seed, int octaves, double base_frequency) {
  Grid2<double> g(n);
  const double inv = 1.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.at(i, j) = fbm(seed, (i + 0.5) * inv, (j + 0.5) * inv, octaves, base_frequency);
  return g;
}

HeightMap blend_heights(const Grid2<double>& low, const Grid2<double>& high, const Grid2<double>& control) {
  if (low.n != high.n || low.n != control.n) fail(ErrorCode::dimension_mismatch, "height layers differ in size");
  HeightMap out{Grid2<double>(low.n)};
  for (std::size_t k = 0; k < low.size(); ++k) {
    const double w = bezier_blend(control.data[k]);
    out.heights.data[k] = std::clamp((1.0 - w) * low.data[k] + w * high.data[k], -1.0, 1.0);
  }
  return out;
}

Grid2<double> height_control(const WorldParams& params) {
  Grid2<double> c = fbm_grid(params.lod_n, params.seed ^ kControlSalt, 2, 0.5 * params.base_frequency);
  for (double& v : c.data) v = 0.5 * (v + 1.0);
  return c;
}

HeightMap gen_height_map(const WorldParams& params) {
  params.validate();
  const int n = params.lod_n;
  const Grid2<double> low = fbm_grid(n, params.seed, params.octaves_low, params.base_frequency);
  const Grid2<double> high = fbm_grid(n, params.seed, params.octaves_high, params.base_frequency);
  return blend_heights(low, high, height_control(params));
}

BiomeMap biome_from_climate(Grid2<double> temperature, Grid2<double> precipitation, const BiomeLut& lut) {
  if (temperature.n != precipitation.n) fail(ErrorCode::dimension_mismatch, "climate maps differ in size");
  BiomeMap out;
  out.biomes = Grid2<Biome>(temperature.n);
  for (std::size_t k = 0; k < temperature.size(); ++k) {
    const double t = std::clamp(temperature.data[k], 0.0, 1.0);
    const double p = std::clamp(precipitation.data[k], 0.0, 1.0);
    out.biomes.data[k] = lut.at(static_cast<int>(t * 255.0), static_cast<int>(p * 255.0));
  }
  out.temperature = std::move(temperature);
  out.precipitation = std::move(precipitation);
  return out;
}

BiomeMap gen_biome_map(const WorldParams& params, const BiomeLut& lut) {
  params.validate();
  auto remap = [](Grid2<double> g) {
    for (double& v : g.data) v = 0.5 * (v + 1.0);
    return g;
  };
  return biome_from_climate(
      remap(fbm_grid(params.lod_n, params.seed ^ kTemperatureSalt, params.biome_octaves, params.base_frequency)),
      remap(fbm_grid(params.lod_n, params.seed ^ kPrecipitationSalt, params.biome_octaves, params.base_frequency)),
      lut);
}

SemanticMap sample_labels(const BiomeMap& biomes, const HeightMap& heights, const LabelRules& rules,
                          std::uint64_t seed) {
  if (biomes.n() != heights.n()) fail(ErrorCode::dimension_mismatch, "biome and height maps differ in size");
  const int n = heights.n();
  SemanticMap out{Grid2<Label>(n, Label::others)};
  const std::uint64_t base = seed ^ kMixtureSalt;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (heights.heights.at(i, j) < 0.0) {
        out.labels.at(i, j) = Label::water;
        continue;
      }
      const auto& probs = rules.probs[static_cast<int>(biomes.biomes.at(i, j))];
      const double u = unit_from_bits(
          hash_combine(hash_combine(base, static_cast<std::uint64_t>(i)), static_cast<std::uint64_t>(j)));
      double acc = 0.0;
      Label chosen = Label::others;
      for (int l = 0; l < kNumLabels; ++l) {
        if (probs[l] <= 0.0) continue;
        acc += probs[l];
        chosen = static_cast<Label>(l);
        if (u < acc) break;
      }
      out.labels.at(i, j) = chosen;
    }
  }
  return out;
}

std::vector<int> assign_voronoi(int n, const std::vector<VoronoiSite>& sites) {
  require(!sites.empty(), "at least one Voronoi site is required");
  const int k = static_cast<int>(sites.size());
  const int g = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k)))));
  const double bucket = static_cast<double>(n) / g;

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(g) * g);
  auto bucket_of = [&](double v) { return std::clamp(static_cast<int>(v / bucket), 0, g - 1); };
  for (int s = 0; s < k; ++s) buckets[bucket_of(sites[s].x) * g + bucket_of(sites[s].y)].push_back(s);

  std::vector<int> owner(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    const double px = i + 0.5;
    const int bi = bucket_of(px);
    for (int j = 0; j < n; ++j) {
      const double py = j + 0.5;
      const int bj = bucket_of(py);
      double best = std::numeric_limits<double>::infinity();
      int best_idx = -1;
      for (int r = 0; r <= g; ++r) {
        // Sites in rings beyond r are at least r bucket widths away.
        const double reach = std::max(0, r - 1) * bucket;
        if (best_idx >= 0 && best < reach * reach) break;
        for (int a = bi - r; a <= bi + r; ++a) {
          if (a < 0 || a >= g) continue;
          for (int b = bj - r; b <= bj + r; ++b) {
            if (b < 0 || b >= g) continue;
            if (std::max(std::abs(a - bi), std::abs(b - bj)) != r) continue;
            for (int s : buckets[a * g + b]) {
              const double dx = px - sites[s].x;
              const double dy = py - sites[s].y;
              const double d2 = dx * dx + dy * dy;
              if (d2 < best || (d2 == best && s < best_idx)) {
                best = d2;
                best_idx = s;
              }
            }
          }
        }
      }
      owner[static_cast<std::size_t>(i) * n + j] = best_idx;
    }
  }
  return owner;
}

double voronoi_energy(int n, const std::vector<VoronoiSite>& sites, const std::vector<int>& owner) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& s = sites[owner[static_cast<std::size_t>(i) * n + j]];
      const double dx = i + 0.5 - s.x;
      const double dy = j + 0.5 - s.y;
      e += dx * dx + dy * dy;
    }
  }
  return e;
}

std::vector<VoronoiSite> random_sites(int n, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VoronoiSite> sites(static_cast<std::size_t>(count));
  for (auto& s : sites) {
    s.x = rng.uniform(0.0, n);
    s.y = rng.uniform(0.0, n);
  }
  return sites;
}

LloydResult lloyd_relax(int n, std::vector<VoronoiSite> sites, int iters) {
  LloydResult res;
  res.owner = assign_voronoi(n, sites);
  res.energies.push_back(voronoi_energy(n, sites, res.owner));
  for (int it = 0; it < iters; ++it) {
    std::vector<double> sx(sites.size(), 0.0), sy(sites.size(), 0.0);
    std::vector<std::size_t> count(sites.size(), 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int o = res.owner[static_cast<std::size_t>(i) * n + j];
        sx[o] += i + 0.5;
        sy[o] += j + 0.5;
        ++count[o];
      }
    }
    for (std::size_t s = 0; s < sites.size(); ++s) {
      if (count[s] == 0) continue;  // empty cell keeps its site
      sites[s].x = sx[s] / static_cast<double>(count[s]);
      sites[s].y = sy[s] / static_cast<double>(count[s]);
    }
    res.owner = assign_voronoi(n, sites);
    res.energies.push_back(voronoi_energy(n, sites, res.owner));
  }
  res.sites = std::move(sites);
  return res;
}

SemanticMap regularize_labels(const SemanticMap& labels, const HeightMap& heights, int voronoi_cells,
                              int lloyd_iters, std::uint64_t seed) {
  require(voronoi_cells >= 1, "voronoi_cells must be positive");
  if (labels.n() != heights.n()) fail(ErrorCode::dimension_mismatch, "label and height maps differ in size");
  const int n = labels.n();
  const LloydResult lloyd = lloyd_relax(n, random_sites(n, voronoi_cells, seed ^ kVoronoiSalt), lloyd_iters);

  // Mode over land pixels only; water is re-derived from the heights.
  std::vector<std::array<std::uint32_t, kNumLabels>> counts(lloyd.sites.size());
  for (auto& c : counts) c.fill(0);
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    const Label l = labels.labels.data[p];
    if (heights.heights.data[p] < 0.0 || l == Label::water) continue;
    ++counts[lloyd.owner[p]][static_cast<int>(l)];
  }
  std::vector<int> mode(lloyd.sites.size(), -1);
  for (std::size_t s = 0; s < counts.size(); ++s) {
    std::uint32_t best = 0;
    for (int l = 0; l < kNumLabels; ++l) {
      if (counts[s][l] > best) {
        best = counts[s][l];
        mode[s] = l;
      }
    }
  }

  SemanticMap out = labels;
  for (std::size_t p = 0; p < out.labels.size(); ++p) {
    if (heights.heights.data[p] < 0.0) {
      out.labels.data[p] = Label::water;
    } else if (mode[lloyd.owner[p]] >= 0) {
      out.labels.data[p] = static_cast<Label>(mode[lloyd.owner[p]]);
    }
  }
  return out;
}

SemanticMap assemble_semantic_map(const BiomeMap& biomes, const HeightMap& heights, const LabelRules& rules,
                                  const WorldParams& params) {
  const SemanticMap raw = sample_labels(biomes, heights, rules, params.seed);
  return regularize_labels(raw, heights, params.voronoi_cells, params.lloyd_iters, params.seed);
}

World generate_world(const WorldParams& params, const BiomeLut& lut, const LabelRules& rules) {
  params.validate();
  World w;
  w.params = params;
  w.height = gen_height_map(params);
  w.biome = gen_biome_map(params, lut);
  w.semantic = assemble_semantic_map(*w.biome, w.height, rules, params);
  return w;
}

World generate_world(const WorldParams& params) {
  return generate_world(params, default_biome_lut(), default_label_rules());
}

}  // namespace bevscape
