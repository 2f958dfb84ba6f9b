// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/formats.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "core/evalmetrics.hpp"

namespace bevscape {

namespace {

constexpr std::size_t kHeaderBytes = 6;  // magic + version
constexpr std::size_t kChecksumBytes = 8;

std::string magic_text(std::span<const std::uint8_t> b) { return std::string(b.begin(), b.begin() + 4); }

}  // namespace

void ByteWriter::magic(std::string_view m) {
  require(m.size() == 4, "magic must be four bytes");
  buf_.insert(buf_.end(), m.begin(), m.end());
  u16(kFormatVersion);
}

void ByteWriter::u16(std::uint16_t v) {
  for (int k = 0; k < 2; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f64s(std::span<const double> v) {
  u64(v.size());
  for (double x : v) f64(x);
}

Bytes ByteWriter::finish() {
  u64(fnv1a64(buf_));
  return std::move(buf_);
}

ByteReader::ByteReader(std::span<const std::uint8_t> bytes, std::string_view magic) : bytes_(bytes) {
  if (bytes.size() < kHeaderBytes + kChecksumBytes) fail(ErrorCode::format, "file too short");
  if (magic_text(bytes) != magic)
    fail(ErrorCode::format, "bad magic: expected " + std::string(magic) + ", got " + magic_text(bytes));
  end_ = bytes.size();
  pos_ = bytes.size() - kChecksumBytes;
  const std::uint64_t stored = u64();
  end_ = bytes.size() - kChecksumBytes;
  if (stored != fnv1a64(bytes.first(end_))) fail(ErrorCode::checksum, "checksum mismatch");
  pos_ = 4;
  const std::uint16_t version = u16();
  if (version != kFormatVersion) fail(ErrorCode::format, "unsupported version " + std::to_string(version));
}

const std::uint8_t* ByteReader::take(std::size_t n) {
  if (n > end_ - pos_) fail(ErrorCode::format, "truncated file");
  const std::uint8_t* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

std::uint8_t ByteReader::u8() { return *take(1); }

std::uint16_t ByteReader::u16() {
  const auto* p = take(2);
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ByteReader::u32() {
  const auto* p = take(4);
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | p[k];
  return v;
}

std::uint64_t ByteReader::u64() {
  const auto* p = take(8);
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::f64s(std::span<double> out) {
  const std::uint64_t n = u64();
  if (n != out.size())
    fail(ErrorCode::dimension_mismatch,
         "array length " + std::to_string(n) + " does not match expected " + std::to_string(out.size()));
  for (double& x : out) x = f64();
}

void ByteReader::expect_end() const {
  if (pos_ != end_) fail(ErrorCode::format, "trailing bytes before checksum");
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::io, "read failed: " + path.string());
  return b;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

// ---- BEV ----

Bytes write_bev(const World& world, int h_w) {
  const int n = world.n();
  require(n >= 1 && world.semantic.n() == n, "world height and label maps must share a positive side");
  require(h_w >= 1, "h_w must be positive");
  ByteWriter w;
  w.magic("SDBV");
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(h_w));
  for (double h : world.height.heights.data) w.f32(static_cast<float>(h));
  for (Label l : world.semantic.labels.data) w.u8(static_cast<std::uint8_t>(l));
  return w.finish();
}

BevFile read_bev(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "SDBV");
  const std::uint32_t n = r.u32();
  const std::uint32_t h_w = r.u32();
  if (n == 0 || h_w == 0 || n > 65536) fail(ErrorCode::format, "invalid BEV dimensions");
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  if (r.remaining() != cells * 5) fail(ErrorCode::format, "BEV payload size does not match n");
  BevFile f;
  f.h_w = static_cast<int>(h_w);
  f.world.params.lod_n = static_cast<int>(n);
  f.world.height.heights = Grid2<double>(static_cast<int>(n));
  f.world.semantic.labels = Grid2<Label>(static_cast<int>(n));
  for (double& h : f.world.height.heights.data) {
    const float v = r.f32();
    if (!std::isfinite(v)) fail(ErrorCode::format, "non-finite height");
    h = v;
  }
  for (Label& l : f.world.semantic.labels.data) {
    const std::uint8_t v = r.u8();
    if (v >= kNumLabels) fail(ErrorCode::format, "label byte out of range: " + std::to_string(v));
    l = static_cast<Label>(v);
  }
  r.expect_end();
  return f;
}

World quantize_world(const World& world) {
  World q = world;
  for (double& h : q.height.heights.data) h = static_cast<float>(h);
  return q;
}

// ---- assets ----

Bytes write_lut(const BiomeLut& lut) {
  ByteWriter w;
  w.magic("SDLT");
  w.u32(kLutSize);
  w.u32(kLutSize);
  for (Biome b : lut.table) w.u8(static_cast<std::uint8_t>(b));
  return w.finish();
}

BiomeLut read_lut(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "SDLT");
  if (r.u32() != kLutSize || r.u32() != kLutSize) fail(ErrorCode::format, "biome LUT must be 256 x 256");
  BiomeLut lut;
  for (Biome& b : lut.table) {
    const std::uint8_t v = r.u8();
    if (v >= kNumBiomes) fail(ErrorCode::format, "biome byte out of range");
    b = static_cast<Biome>(v);
  }
  r.expect_end();
  return lut;
}

Bytes write_rules(const LabelRules& rules) {
  ByteWriter w;
  w.magic("SDLR");
  w.u32(kNumBiomes);
  w.u32(kNumLabels);
  for (const auto& row : rules.probs)
    for (double p : row) w.f64(p);
  return w.finish();
}

LabelRules read_rules(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "SDLR");
  if (r.u32() != kNumBiomes || r.u32() != kNumLabels) fail(ErrorCode::format, "label rules must be 9 x 12");
  LabelRules rules;
  for (auto& row : rules.probs) {
    double s = 0.0;
    for (double& p : row) {
      p = r.f64();
      if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::format, "rule probability outside [0, 1]");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) fail(ErrorCode::format, "rule row does not sum to 1");
  }
  r.expect_end();
  return rules;
}

Bytes write_palette(const Palette& palette) {
  ByteWriter w;
  w.magic("SDPL");
  w.u32(kNumLabels);
  for (const auto& c : palette.colors)
    for (std::uint8_t v : c) w.u8(v);
  return w.finish();
}

Palette read_palette(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "SDPL");
  if (r.u32() != kNumLabels) fail(ErrorCode::format, "palette must hold 12 colors");
  Palette p;
  for (auto& c : p.colors)
    for (std::uint8_t& v : c) v = r.u8();
  r.expect_end();
  return p;
}

// ---- checkpoint ----

namespace {

void put_adam(ByteWriter& w, const AdamState& s) {
  w.i64(s.step);
  w.f64s(s.m);
  w.f64s(s.v);
}

AdamState get_adam(ByteReader& r, std::size_t n) {
  AdamState s = AdamState::zeros(n);
  s.step = r.i64();
  r.f64s(s.m);
  r.f64s(s.v);
  return s;
}

}  // namespace

Bytes write_checkpoint(const Checkpoint& ck) {
  const TrainConfig& c = ck.config;
  const Model& m = ck.model;
  ByteWriter w;
  w.magic("SDCK");
  const HashGridConfig& h = m.hash_config;
  w.i32(h.levels);
  w.u32(h.table_size);
  w.i32(h.channels);
  w.i32(h.n_min);
  w.i32(h.n_max);
  for (std::uint32_t p : h.primes) w.u32(p);
  const FieldDims& d = m.field_dims;
  w.i32(d.feature_dim);
  w.i32(d.hidden);
  w.i32(d.layers);
  w.i32(d.embed);
  w.i32(d.map_hidden);

  w.i32(c.iterations);
  w.i32(c.patch);
  w.i32(c.samples);
  w.f64(c.fov_y);
  w.f64(c.lr_encoder);
  w.f64(c.lr_hash);
  w.f64(c.lr_field);
  w.f64(c.lr_discriminator);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.eps);
  w.f64(c.w_mse);
  w.f64(c.w_gan);
  w.f64(c.w_perceptual);
  w.u64(c.seed);
  w.u64(c.style_seed);
  w.i32(c.n_w);
  w.i32(c.h_w);
  w.i32(c.hidden);
  w.u8(c.fixed_view ? 1 : 0);
  w.i32(c.policy.probe_size);
  w.f64(c.policy.tau_depth);
  w.f64(c.policy.tau_entropy);
  w.i32(c.policy.max_attempts);
  w.f64(c.policy.fov_y);

  w.i64(ck.iteration);
  for (double z : m.style.z) w.f64(z);
  w.f64s(m.encoder.values());
  w.f64s(m.table.entries());
  w.f64s(m.field.values());
  put_adam(w, ck.adam_encoder);
  put_adam(w, ck.adam_hash);
  put_adam(w, ck.adam_field);
  return w.finish();
}

Checkpoint read_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "SDCK");
  Checkpoint ck;
  HashGridConfig h;
  h.levels = r.i32();
  h.table_size = r.u32();
  h.channels = r.i32();
  h.n_min = r.i32();
  h.n_max = r.i32();
  for (std::uint32_t& p : h.primes) p = r.u32();
  try {
    h.validate();
  } catch (const Error& e) {
    fail(ErrorCode::format, std::string("checkpoint hash grid: ") + e.what());
  }
  // Parameters and two moment buffers are all stored, so the body bounds the
  // table size before anything is allocated.
  if (h.levels > 64 || h.channels > 64 || h.entry_count() > r.remaining() / (3 * sizeof(double)))
    fail(ErrorCode::format, "checkpoint hash grid larger than the file");
  FieldDims d;
  d.feature_dim = r.i32();
  d.hidden = r.i32();
  d.layers = r.i32();
  d.embed = r.i32();
  d.map_hidden = r.i32();
  if (d.feature_dim != h.feature_dim() || d.hidden < 1 || d.hidden > 4096 || d.layers < 1 || d.layers > 64 ||
      d.embed < 1 || d.embed > 4096 || d.map_hidden < 1 || d.map_hidden > 4096)
    fail(ErrorCode::format, "checkpoint field dimensions are inconsistent");

  TrainConfig& c = ck.config;
  c.iterations = r.i32();
  c.patch = r.i32();
  c.samples = r.i32();
  c.fov_y = r.f64();
  c.lr_encoder = r.f64();
  c.lr_hash = r.f64();
  c.lr_field = r.f64();
  c.lr_discriminator = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.eps = r.f64();
  c.w_mse = r.f64();
  c.w_gan = r.f64();
  c.w_perceptual = r.f64();
  c.seed = r.u64();
  c.style_seed = r.u64();
  c.n_w = r.i32();
  c.h_w = r.i32();
  c.hidden = r.i32();
  c.fixed_view = r.u8() != 0;
  c.policy.probe_size = r.i32();
  c.policy.tau_depth = r.f64();
  c.policy.tau_entropy = r.f64();
  c.policy.max_attempts = r.i32();
  c.policy.fov_y = r.f64();
  c.hash = h;

  ck.iteration = r.i64();
  Model& m = ck.model;
  m.hash_config = h;
  m.field_dims = d;
  for (double& z : m.style.z) z = r.f64();
  m.encoder = EncoderParams();
  r.f64s(m.encoder.values());
  m.table = HashGridTable(h);
  r.f64s(m.table.entries());
  m.field = FieldParams(d);
  r.f64s(m.field.values());
  ck.adam_encoder = get_adam(r, m.encoder.values().size());
  ck.adam_hash = get_adam(r, m.table.entries().size());
  ck.adam_field = get_adam(r, m.field.values().size());
  r.expect_end();
  return ck;
}

// ---- images ----

Bytes encode_ppm(const Image8& img) {
  require(img.width >= 1 && img.height >= 1, "image must be non-empty");
  require(img.rgb.size() == static_cast<std::size_t>(img.width) * img.height * 3, "image buffer size mismatch");
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.rgb.begin(), img.rgb.end());
  return out;
}

Image8 decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  };
  auto number = [&]() {
    const std::string t = token();
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v <= 0) fail(ErrorCode::format, "bad PPM header");
    return v;
  };
  if (token() != "P6") fail(ErrorCode::format, "not a P6 image");
  Image8 img;
  img.width = number();
  img.height = number();
  if (number() != 255) fail(ErrorCode::format, "only maxval 255 is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * 3;
  if (bytes.size() < pos || bytes.size() - pos != n) fail(ErrorCode::format, "PPM pixel data size mismatch");
  img.rgb.assign(bytes.begin() + pos, bytes.end());
  return img;
}

std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

namespace {

Image8 blank(int w, int h) {
  Image8 img;
  img.width = w;
  img.height = h;
  img.rgb.assign(static_cast<std::size_t>(w) * h * 3, 0);
  return img;
}

}  // namespace

Image8 rgb_image(const FrameBuffers& fb) {
  Image8 img = blank(fb.width, fb.height);
  for (std::size_t k = 0; k < img.rgb.size(); ++k) img.rgb[k] = to_byte(fb.rgb[k]);
  return img;
}

Image8 depth_image(const FrameBuffers& fb, double max_residual) {
  const DepthMap d = depth_from_frame(fb, max_residual);
  Image8 img = blank(fb.width, fb.height);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t p = 0; p < d.pixels(); ++p) {
    if (!d.valid[p]) continue;
    lo = std::min(lo, d.values[p]);
    hi = std::max(hi, d.values[p]);
  }
  for (std::size_t p = 0; p < d.pixels(); ++p) {
    if (!d.valid[p]) continue;
    const double v = hi > lo ? (d.values[p] - lo) / (hi - lo) : 0.0;
    const std::uint8_t b = to_byte(v);
    img.rgb[p * 3] = img.rgb[p * 3 + 1] = img.rgb[p * 3 + 2] = b;
  }
  return img;
}

Image8 label_image(const FrameBuffers& fb, const Palette& palette) {
  Image8 img = blank(fb.width, fb.height);
  for (std::size_t p = 0; p < fb.pixels(); ++p) {
    const auto dist = fb.effective_labels(p);
    const int best = static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    const auto& c = palette.colors[best];
    std::copy(c.begin(), c.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(p * 3));
  }
  return img;
}

Image8 semantic_map_image(const SemanticMap& map, const Palette& palette) {
  Image8 img = blank(map.n(), map.n());
  for (std::size_t p = 0; p < map.labels.data.size(); ++p) {
    const auto& c = palette.colors[static_cast<int>(map.labels.data[p])];
    std::copy(c.begin(), c.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(p * 3));
  }
  return img;
}

Image8 height_map_image(const HeightMap& map) {
  Image8 img = blank(map.n(), map.n());
  for (std::size_t p = 0; p < map.heights.data.size(); ++p) {
    const std::uint8_t b = to_byte(0.5 * (map.heights.data[p] + 1.0));
    img.rgb[p * 3] = img.rgb[p * 3 + 1] = img.rgb[p * 3 + 2] = b;
  }
  return img;
}

// ---- trajectory ----

std::string format_trajectory(const std::vector<TrajectoryPoint>& points) {
  std::string out;
  char buf[64];
  for (const auto& tp : points) {
    const double v[6] = {tp.position.x, tp.position.y, tp.position.z, tp.target.x, tp.target.y, tp.target.z};
    for (int k = 0; k < 6; ++k) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v[k]);
      out.append(buf, res.ptr);
      out.push_back(k == 5 ? '\n' : ',');
    }
  }
  return out;
}

std::vector<TrajectoryPoint> parse_trajectory(std::string_view text) {
  std::vector<TrajectoryPoint> pts;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;
    double v[6];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 6; ++k) {
      while (p < end && *p == ' ') ++p;
      const auto res = std::from_chars(p, end, v[k]);
      if (res.ec != std::errc() || !std::isfinite(v[k]))
        fail(ErrorCode::format, "trajectory line " + std::to_string(line_no) + ": expected 6 numbers");
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (k < 5) {
        if (p == end || *p != ',')
          fail(ErrorCode::format, "trajectory line " + std::to_string(line_no) + ": expected 6 numbers");
        ++p;
      }
    }
    if (p != end) fail(ErrorCode::format, "trajectory line " + std::to_string(line_no) + ": trailing characters");
    pts.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  return pts;
}

}  // namespace bevscape
