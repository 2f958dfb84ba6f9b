// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bevscape {

// Terrain semantic classes. The numeric ids are part of the file formats.
enum class Label : std::uint8_t {
  sky = 0,
  tree,
  dirt,
  flower,
  grass,
  gravel,
  water,
  rock,
  stone,
  sand,
  snow,
  others,
};
inline constexpr int kNumLabels = 12;

enum class Biome : std::uint8_t {
  desert = 0,
  savanna,
  woodland,
  tundra,
  seasonal_forest,
  rain_forest,
  taiga,
  temperate_forest,
  grassland,
};
inline constexpr int kNumBiomes = 9;

const char* label_name(Label l);
const char* biome_name(Biome b);

enum class ErrorCode {
  invalid_argument = 1,
  dimension_mismatch,
  io,
  format,
  checksum,
  runtime,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

// Square n x n grid, row-major with index (i, j) -> i * n + j. Axis i runs
// along world x and axis j along world y.
template <class T>
struct Grid2 {
  int n = 0;
  std::vector<T> data;

  Grid2() = default;
  explicit Grid2(int side, T fill = T{}) : n(side), data(static_cast<std::size_t>(side) * side, fill) {}

  T& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  const T& at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
  std::size_t size() const { return data.size(); }
  bool operator==(const Grid2&) const = default;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
  bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v * (1.0 / norm(v)); }

using Rgb = std::array<double, 3>;

// 64-bit finalizer from splitmix64; the basis for all position hashes.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ull);

// Seeded generator with platform-independent conversions (std distributions
// are implementation-defined, which would break golden files).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return unit_from_bits(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace bevscape
