// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/hashgrid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace bevscape {

namespace {

struct LevelStencil {
  int resolution = 0;
  std::array<std::uint32_t, kHashCorners> index{};
  std::array<double, kHashCorners> weight{};
  std::array<double, kHashDims> frac{};
};

std::array<double, kHashDims> hash_input(const Vec3& x, std::array<double, 2> f_s) {
  return {std::clamp(f_s[0], 0.0, 1.0), std::clamp(f_s[1], 0.0, 1.0), std::clamp(x.x, 0.0, 1.0),
          std::clamp(x.y, 0.0, 1.0), std::clamp(x.z, 0.0, 1.0)};
}

LevelStencil stencil(const HashGridConfig& cfg, int level, const std::array<double, kHashDims>& in) {
  LevelStencil st;
  st.resolution = level_resolution(cfg, level);
  const double scale = st.resolution;
  // terms[d][b]: hashed contribution of axis d at base + b.
  std::array<std::array<std::uint32_t, 2>, kHashDims> terms{};
  for (int d = 0; d < kHashDims; ++d) {
    const double pos = in[d] * scale;
    const double base = std::floor(pos);
    st.frac[d] = pos - base;
    const auto b = static_cast<std::uint32_t>(base);
    terms[d][0] = b * cfg.primes[d];
    terms[d][1] = (b + 1u) * cfg.primes[d];
  }
  const std::uint32_t mask = cfg.table_size - 1u;
  for (int c = 0; c < kHashCorners; ++c) {
    std::uint32_t h = 0;
    double w = 1.0;
    for (int d = 0; d < kHashDims; ++d) {
      const int bit = (c >> d) & 1;
      h ^= terms[d][bit];
      w *= bit ? st.frac[d] : 1.0 - st.frac[d];
    }
    st.index[c] = h & mask;
    st.weight[c] = w;
  }
  return st;
}

// d weight_c / d frac_axis
double weight_derivative(const LevelStencil& st, int corner, int axis) {
  double w = ((corner >> axis) & 1) ? 1.0 : -1.0;
  for (int d = 0; d < kHashDims; ++d) {
    if (d == axis) continue;
    w *= ((corner >> d) & 1) ? st.frac[d] : 1.0 - st.frac[d];
  }
  return w;
}

bool inside_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void HashGridConfig::validate() const {
  require(levels >= 1, "hash grid needs at least one level");
  require(table_size >= 1 && std::has_single_bit(table_size), "hash table size must be a power of two");
  require(channels >= 1, "hash grid needs at least one channel");
  require(n_min >= 1 && n_min <= n_max, "hash grid resolutions must satisfy 1 <= n_min <= n_max");
  require(levels == 1 || n_min < n_max, "multi-level hash grids need n_min < n_max");
}

HashGridConfig HashGridConfig::desk() {
  HashGridConfig c;
  c.levels = 8;
  c.table_size = 1u << 14;
  c.channels = 4;
  c.n_min = 4;
  c.n_max = 256;
  return c;
}

HashGridTable::HashGridTable(const HashGridConfig& config) : config_(config) {
  config_.validate();
  entries_.assign(config_.entry_count(), 0.0);
}

HashGridTable HashGridTable::random(const HashGridConfig& config, std::uint64_t seed) {
  HashGridTable t(config);
  Rng rng(seed);
  for (double& e : t.entries_) e = rng.uniform(-1e-4, 1e-4);
  return t;
}

int level_resolution(const HashGridConfig& config, int level) {
  require(level >= 0 && level < config.levels, "hash level out of range");
  if (config.levels == 1) return config.n_min;
  const double growth =
      std::exp(std::log(static_cast<double>(config.n_max) / config.n_min) / (config.levels - 1));
  return static_cast<int>(std::floor(config.n_min * std::pow(growth, level)));
}

std::uint32_t hash_index(const HashCorner& corner, const HashGridConfig& config) {
  std::uint32_t h = 0;
  for (int d = 0; d < kHashDims; ++d) h ^= corner[d] * config.primes[d];
  return h & (config.table_size - 1u);
}

void encode(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table, std::span<double> out) {
  const HashGridConfig& cfg = table.config();
  const int C = cfg.channels;
  require(out.size() == static_cast<std::size_t>(cfg.feature_dim()), "encode output has wrong length");
  const auto in = hash_input(x, f_s);
  const std::span<const double> entries = table.entries();
  for (int l = 0; l < cfg.levels; ++l) {
    const LevelStencil st = stencil(cfg, l, in);
    double* dst = out.data() + static_cast<std::size_t>(l) * C;
    std::fill(dst, dst + C, 0.0);
    const double* level_base = entries.data() + static_cast<std::size_t>(l) * cfg.table_size * C;
    for (int c = 0; c < kHashCorners; ++c) {
      const double w = st.weight[c];
      if (w == 0.0) continue;
      const double* e = level_base + static_cast<std::size_t>(st.index[c]) * C;
      for (int ch = 0; ch < C; ++ch) dst[ch] += w * e[ch];
    }
  }
}

std::vector<double> encode(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table) {
  std::vector<double> out(static_cast<std::size_t>(table.config().feature_dim()));
  encode(x, f_s, table, out);
  return out;
}

HashGradients encode_backward(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table,
                              std::span<const double> upstream) {
  const HashGridConfig& cfg = table.config();
  const int C = cfg.channels;
  require(upstream.size() == static_cast<std::size_t>(cfg.feature_dim()), "upstream gradient has wrong length");
  const auto in = hash_input(x, f_s);
  HashGradients g;
  for (int l = 0; l < cfg.levels; ++l) {
    const double* up = upstream.data() + static_cast<std::size_t>(l) * C;
    if (std::all_of(up, up + C, [](double v) { return v == 0.0; })) continue;
    const LevelStencil st = stencil(cfg, l, in);
    for (int c = 0; c < kHashCorners; ++c) {
      double dot_up = 0.0;
      for (int ch = 0; ch < C; ++ch) {
        dot_up += table.entry(l, st.index[c], ch) * up[ch];
        const double v = st.weight[c] * up[ch];
        if (v != 0.0) g.d_entries.push_back({l, st.index[c], ch, v});
      }
      for (int a = 0; a < 2; ++a) g.d_feat[a] += weight_derivative(st, c, a) * dot_up * st.resolution;
    }
  }
  for (int a = 0; a < 2; ++a)
    if (!inside_unit(f_s[a])) g.d_feat[a] = 0.0;
  return g;
}

std::array<double, 2> encode_backward_into(const Vec3& x, std::array<double, 2> f_s, const HashGridTable& table,
                                           std::span<const double> upstream, std::span<double> grad_table) {
  const HashGridConfig& cfg = table.config();
  const int C = cfg.channels;
  require(grad_table.size() == cfg.entry_count(), "gradient buffer does not match the table");
  const auto in = hash_input(x, f_s);
  const std::span<const double> entries = table.entries();
  std::array<double, 2> d_feat{0.0, 0.0};
  for (int l = 0; l < cfg.levels; ++l) {
    const double* up = upstream.data() + static_cast<std::size_t>(l) * C;
    const LevelStencil st = stencil(cfg, l, in);
    const std::size_t level_off = static_cast<std::size_t>(l) * cfg.table_size * C;
    double df0 = 0.0, df1 = 0.0;
    for (int c = 0; c < kHashCorners; ++c) {
      const std::size_t off = level_off + static_cast<std::size_t>(st.index[c]) * C;
      double dot_up = 0.0;
      for (int ch = 0; ch < C; ++ch) {
        dot_up += entries[off + ch] * up[ch];
        grad_table[off + ch] += st.weight[c] * up[ch];
      }
      df0 += weight_derivative(st, c, 0) * dot_up;
      df1 += weight_derivative(st, c, 1) * dot_up;
    }
    d_feat[0] += df0 * st.resolution;
    d_feat[1] += df1 * st.resolution;
  }
  for (int a = 0; a < 2; ++a)
    if (!inside_unit(f_s[a])) d_feat[a] = 0.0;
  return d_feat;
}

}  // namespace bevscape
