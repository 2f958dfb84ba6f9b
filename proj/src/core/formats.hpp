// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-exact file formats: BEV worlds, asset tables, checkpoints, PPM images
// and trajectory CSV. All multi-byte values are little-endian. Every binary
// file is magic (4 bytes), u16 version, body, then a u64 FNV-1a checksum over
// all preceding bytes.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/camera.hpp"
#include "core/renderfield.hpp"
#include "core/training.hpp"
#include "core/worldgen.hpp"

namespace bevscape {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint16_t kFormatVersion = 1;

class ByteWriter {
 public:
  void magic(std::string_view m);
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f32(float v);
  void f64(double v);
  void f64s(std::span<const double> v);
  // Appends the checksum of everything written so far and returns the bytes.
  Bytes finish();
  const Bytes& bytes() const { return buf_; }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  // Verifies magic, version and trailing checksum before any field is read.
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view magic);

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32();
  double f64();
  void f64s(std::span<double> out);
  std::size_t remaining() const { return end_ - pos_; }
  // Fails unless the body was consumed exactly.
  void expect_end() const;

 private:
  const std::uint8_t* take(std::size_t n);
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// BEV world file "SDBV": u32 n, u32 h_w, n^2 f32 heights, n^2 label bytes.
struct BevFile {
  World world;
  int h_w = 0;
};

Bytes write_bev(const World& world, int h_w);
BevFile read_bev(std::span<const std::uint8_t> bytes);
// Heights as stored on disk (float32 rounding), so worlds compare after a
// round trip.
World quantize_world(const World& world);

// Asset tables: "SDLT" biome LUT, "SDLR" label rules, "SDPL" palette.
Bytes write_lut(const BiomeLut& lut);
BiomeLut read_lut(std::span<const std::uint8_t> bytes);
Bytes write_rules(const LabelRules& rules);
LabelRules read_rules(std::span<const std::uint8_t> bytes);
Bytes write_palette(const Palette& palette);
Palette read_palette(std::span<const std::uint8_t> bytes);

// Training checkpoint "SDCK": configuration, model, optimizer state, step.
Bytes write_checkpoint(const Checkpoint& ck);
Checkpoint read_checkpoint(std::span<const std::uint8_t> bytes);

// 8-bit images. PPM P6 with maxval 255.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

Bytes encode_ppm(const Image8& img);
Image8 decode_ppm(std::span<const std::uint8_t> bytes);
std::uint8_t to_byte(double v);  // clamp to [0, 1], round to nearest
Image8 rgb_image(const FrameBuffers& fb);
// Valid pixels (residual <= max_residual) spread linearly from min -> 0 to
// max -> 255; invalid pixels are black.
Image8 depth_image(const FrameBuffers& fb, double max_residual = 0.5);
// Dominant effective label per pixel, colored by the palette.
Image8 label_image(const FrameBuffers& fb, const Palette& palette);
Image8 semantic_map_image(const SemanticMap& map, const Palette& palette);
Image8 height_map_image(const HeightMap& map);

// Trajectory CSV, one pose per line: x,y,z,tx,ty,tz in voxel units.
struct TrajectoryPoint {
  Vec3 position;
  Vec3 target;
  bool operator==(const TrajectoryPoint& o) const {
    return position.x == o.position.x && position.y == o.position.y && position.z == o.position.z &&
           target.x == o.target.x && target.y == o.target.y && target.z == o.target.z;
  }
};

std::string format_trajectory(const std::vector<TrajectoryPoint>& points);
std::vector<TrajectoryPoint> parse_trajectory(std::string_view text);

}  // namespace bevscape
