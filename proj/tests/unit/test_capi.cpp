// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// The shared library as a client sees it: only the public header.
#include <bevscape/bevscape.h>
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

namespace fs = std::filesystem;

struct WorldDel {
  void operator()(bvs_world* w) const { bvs_world_free(w); }
};
struct ModelDel {
  void operator()(bvs_model* m) const { bvs_model_free(m); }
};
struct SessionDel {
  void operator()(bvs_session* s) const { bvs_session_free(s); }
};
struct FrameDel {
  void operator()(bvs_frame* f) const { bvs_frame_free(f); }
};
using WorldPtr = std::unique_ptr<bvs_world, WorldDel>;
using ModelPtr = std::unique_ptr<bvs_model, ModelDel>;
using SessionPtr = std::unique_ptr<bvs_session, SessionDel>;
using FramePtr = std::unique_ptr<bvs_frame, FrameDel>;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bevscape_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

WorldPtr make_world(int n, uint64_t seed) {
  bvs_world_params p{};
  EXPECT_EQ(bvs_world_params_default(n, seed, &p), BVS_OK);
  bvs_world* w = nullptr;
  EXPECT_EQ(bvs_world_generate(&p, nullptr, nullptr, &w), BVS_OK) << bvs_last_error();
  return WorldPtr(w);
}

bvs_train_config tiny_config() {
  bvs_train_config c{};
  bvs_train_config_default(&c);
  c.iterations = 3;
  c.patch = 4;
  c.samples = 8;
  c.n_w = 32;
  c.h_w = 32;
  c.hidden = 8;
  c.hash_levels = 2;
  c.hash_log2_table = 8;
  c.hash_n_max = 16;
  return c;
}

TEST(CApi, StatusNamesAreDistinct) {
  std::vector<std::string> names;
  for (int s = BVS_OK; s <= BVS_ERR_INTERNAL; ++s) names.emplace_back(bvs_status_name(static_cast<bvs_status>(s)));
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::size_t b = a + 1; b < names.size(); ++b) EXPECT_NE(names[a], names[b]);
  EXPECT_STREQ(bvs_status_name(BVS_OK), "ok");
  EXPECT_STRNE(bvs_version(), "");
}

TEST(CApi, NullArgumentsReportInvalidArgument) {
  EXPECT_EQ(bvs_world_params_default(64, 1, nullptr), BVS_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(bvs_last_error()).find("NULL"), std::string::npos);
  EXPECT_EQ(bvs_world_generate(nullptr, nullptr, nullptr, nullptr), BVS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(bvs_style_sample(1, nullptr), BVS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(bvs_world_size(nullptr), 0);
  EXPECT_EQ(bvs_frame_width(nullptr), 0);
  bvs_world_free(nullptr);
  bvs_model_free(nullptr);
  bvs_session_free(nullptr);
  bvs_frame_free(nullptr);
  // A successful call clears the message.
  bvs_world_params p{};
  EXPECT_EQ(bvs_world_params_default(64, 1, &p), BVS_OK);
  EXPECT_STREQ(bvs_last_error(), "");
}

TEST(CApi, InvalidWorldParamsAreRejected) {
  bvs_world_params p{};
  ASSERT_EQ(bvs_world_params_default(64, 1, &p), BVS_OK);
  p.n = 8;
  bvs_world* w = reinterpret_cast<bvs_world*>(0x1);
  EXPECT_EQ(bvs_world_generate(&p, nullptr, nullptr, &w), BVS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(w, nullptr);
}

TEST(CApi, MissingFileIsIoError) {
  bvs_world* w = nullptr;
  EXPECT_EQ(bvs_world_load(scratch("does_not_exist.bev").c_str(), &w, nullptr), BVS_ERR_IO);
  EXPECT_EQ(w, nullptr);
}

TEST(CApi, WorldSaveLoadRoundTrip) {
  WorldPtr w = make_world(64, 11);
  ASSERT_TRUE(w);
  const std::string path = scratch("w.bev").string();
  ASSERT_EQ(bvs_world_save(w.get(), 48, path.c_str()), BVS_OK) << bvs_last_error();
  bvs_world* raw = nullptr;
  int h_w = 0;
  ASSERT_EQ(bvs_world_load(path.c_str(), &raw, &h_w), BVS_OK) << bvs_last_error();
  WorldPtr back(raw);
  EXPECT_EQ(h_w, 48);
  ASSERT_EQ(bvs_world_size(back.get()), 64);

  const std::size_t n2 = 64 * 64;
  std::vector<double> ha(n2), hb(n2);
  std::vector<uint8_t> la(n2), lb(n2);
  ASSERT_EQ(bvs_world_heights(w.get(), ha.data(), n2), BVS_OK);
  ASSERT_EQ(bvs_world_heights(back.get(), hb.data(), n2), BVS_OK);
  ASSERT_EQ(bvs_world_labels(w.get(), la.data(), n2), BVS_OK);
  ASSERT_EQ(bvs_world_labels(back.get(), lb.data(), n2), BVS_OK);
  EXPECT_EQ(la, lb);
  // The file stores heights at reduced precision.
  for (std::size_t k = 0; k < n2; ++k) EXPECT_NEAR(ha[k], hb[k], 1e-3);

  EXPECT_EQ(bvs_world_heights(w.get(), ha.data(), n2 - 1), BVS_ERR_DIMENSION_MISMATCH);

  // Corrupting one payload byte must be detected.
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(static_cast<std::streamoff>(fs::file_size(path) / 2));
  char c = 0;
  f.read(&c, 1);
  f.seekp(static_cast<std::streamoff>(fs::file_size(path) / 2));
  c = static_cast<char>(c ^ 0x5a);
  f.write(&c, 1);
  f.close();
  raw = nullptr;
  EXPECT_EQ(bvs_world_load(path.c_str(), &raw, nullptr), BVS_ERR_CHECKSUM);
}

TEST(CApi, WorldsAreDeterministic) {
  WorldPtr a = make_world(64, 5), b = make_world(64, 5);
  std::vector<double> ha(64 * 64), hb(64 * 64);
  bvs_world_heights(a.get(), ha.data(), ha.size());
  bvs_world_heights(b.get(), hb.data(), hb.size());
  EXPECT_EQ(0, std::memcmp(ha.data(), hb.data(), ha.size() * sizeof(double)));
}

TEST(CApi, SurrogateCircleRenderIsConservativeAndAccurate) {
  WorldPtr w = make_world(64, 3);
  bvs_session* raw = nullptr;
  ASSERT_EQ(bvs_session_create(w.get(), nullptr, 64, 32, &raw), BVS_OK) << bvs_last_error();
  SessionPtr s(raw);
  std::vector<bvs_pose> poses(4);
  ASSERT_EQ(bvs_circle_poses(w.get(), 64, 32, 4, poses.data()), BVS_OK) << bvs_last_error();

  bvs_render_options ro{};
  bvs_render_options_default(&ro);
  ro.width = ro.height = 24;
  ro.samples = 128;
  ro.threads = 1;
  std::vector<FramePtr> frames;
  for (const bvs_pose& p : poses) {
    bvs_frame* f = nullptr;
    ASSERT_EQ(bvs_session_render(s.get(), &p, &ro, &f, nullptr), BVS_OK) << bvs_last_error();
    frames.emplace_back(f);
    ASSERT_EQ(bvs_frame_width(f), 24);
    ASSERT_EQ(bvs_frame_height(f), 24);

    const std::size_t px = 24 * 24;
    std::vector<double> dist(px * BVS_NUM_LABELS), res(px), rgb(px * 3);
    ASSERT_EQ(bvs_frame_label_dist(f, dist.data(), dist.size()), BVS_OK);
    ASSERT_EQ(bvs_frame_residual(f, res.data(), res.size()), BVS_OK);
    ASSERT_EQ(bvs_frame_rgb(f, rgb.data(), rgb.size()), BVS_OK);
    for (std::size_t q = 0; q < px; ++q) {
      double sum = res[q];
      for (int l = 0; l < BVS_NUM_LABELS; ++l) sum += dist[q * BVS_NUM_LABELS + l];
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    for (double v : rgb) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }

    bvs_frame_metrics m{};
    ASSERT_EQ(bvs_frame_evaluate(w.get(), f, &m), BVS_OK) << bvs_last_error();
    EXPECT_GT(m.valid_fraction, 0.5);
    EXPECT_LT(m.depth_error, 0.05);
    EXPECT_GE(m.label_entropy, 0.0);
    EXPECT_LE(m.label_entropy, std::log(12.0) + 1e-12);
  }
  double err = -1, frac = -1;
  ASSERT_EQ(bvs_frame_reprojection(frames[0].get(), frames[0].get(), &err, &frac), BVS_OK);
  EXPECT_LT(err, 1e-9);
  EXPECT_GT(frac, 0.5);
}

TEST(CApi, SessionRebindsWhenCameraLeavesCenter) {
  WorldPtr w = make_world(128, 9);
  bvs_session* raw = nullptr;
  ASSERT_EQ(bvs_session_create(w.get(), nullptr, 64, 32, &raw), BVS_OK);
  SessionPtr s(raw);
  bvs_render_options ro{};
  bvs_render_options_default(&ro);
  ro.width = ro.height = 2;
  ro.samples = 4;
  int rebound = -1;
  bvs_frame* f = nullptr;
  bvs_pose p{64, 64, 30, 70, 64, 0};
  ASSERT_EQ(bvs_session_render(s.get(), &p, &ro, &f, &rebound), BVS_OK) << bvs_last_error();
  bvs_frame_free(f);
  EXPECT_EQ(rebound, 1);
  p = {68, 60, 30, 70, 64, 0};
  ASSERT_EQ(bvs_session_render(s.get(), &p, &ro, &f, &rebound), BVS_OK);
  bvs_frame_free(f);
  EXPECT_EQ(rebound, 0);
  p = {100, 64, 30, 70, 64, 0};
  ASSERT_EQ(bvs_session_render(s.get(), &p, &ro, &f, &rebound), BVS_OK);
  bvs_frame_free(f);
  EXPECT_EQ(rebound, 1);
}

TEST(CApi, DegeneratePoseIsRejected) {
  WorldPtr w = make_world(64, 3);
  bvs_session* raw = nullptr;
  ASSERT_EQ(bvs_session_create(w.get(), nullptr, 64, 32, &raw), BVS_OK);
  SessionPtr s(raw);
  bvs_render_options ro{};
  bvs_render_options_default(&ro);
  const bvs_pose p{10, 10, 10, 10, 10, 10};
  bvs_frame* f = nullptr;
  EXPECT_EQ(bvs_session_render(s.get(), &p, &ro, &f, nullptr), BVS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(f, nullptr);
}

TEST(CApi, TrainSaveLoadAndStyle) {
  WorldPtr w = make_world(64, 4);
  const bvs_train_config c = tiny_config();
  std::vector<double> losses;
  auto cb = [](int64_t, double loss, void* user) { static_cast<std::vector<double>*>(user)->push_back(loss); };
  bvs_model* raw = nullptr;
  ASSERT_EQ(bvs_train(w.get(), &c, nullptr, cb, &losses, &raw), BVS_OK) << bvs_last_error();
  ModelPtr m(raw);
  ASSERT_EQ(losses.size(), 3u);
  for (double l : losses) EXPECT_TRUE(std::isfinite(l));
  EXPECT_EQ(bvs_model_iteration(m.get()), 3);

  const std::string path = scratch("m.ckpt").string();
  ASSERT_EQ(bvs_model_save(m.get(), path.c_str()), BVS_OK) << bvs_last_error();
  raw = nullptr;
  ASSERT_EQ(bvs_model_load(path.c_str(), &raw), BVS_OK) << bvs_last_error();
  ModelPtr back(raw);
  EXPECT_EQ(bvs_model_iteration(back.get()), 3);

  double za[BVS_STYLE_DIM], zb[BVS_STYLE_DIM], zs[BVS_STYLE_DIM];
  ASSERT_EQ(bvs_model_get_style(m.get(), za), BVS_OK);
  ASSERT_EQ(bvs_model_get_style(back.get(), zb), BVS_OK);
  EXPECT_EQ(0, std::memcmp(za, zb, sizeof za));
  ASSERT_EQ(bvs_style_sample(c.style_seed, zs), BVS_OK);
  EXPECT_EQ(0, std::memcmp(za, zs, sizeof za));

  ASSERT_EQ(bvs_style_sample(99, zs), BVS_OK);
  ASSERT_EQ(bvs_model_set_style(back.get(), zs), BVS_OK);
  ASSERT_EQ(bvs_model_get_style(back.get(), zb), BVS_OK);
  EXPECT_EQ(0, std::memcmp(zs, zb, sizeof zs));
  zs[3] = NAN;
  EXPECT_EQ(bvs_model_set_style(back.get(), zs), BVS_ERR_INVALID_ARGUMENT);

  // Resuming continues the iteration count.
  raw = nullptr;
  ASSERT_EQ(bvs_train(w.get(), &c, m.get(), nullptr, nullptr, &raw), BVS_OK) << bvs_last_error();
  ModelPtr more(raw);
  EXPECT_EQ(bvs_model_iteration(more.get()), 6);
}

TEST(CApi, NeuralSessionRendersAndBlends) {
  WorldPtr w = make_world(64, 4), other = make_world(64, 8);
  const bvs_train_config c = tiny_config();
  bvs_model* raw = nullptr;
  ASSERT_EQ(bvs_model_create(&c, &raw), BVS_OK) << bvs_last_error();
  ModelPtr m(raw);
  bvs_session* sraw = nullptr;
  ASSERT_EQ(bvs_session_create(w.get(), m.get(), 32, 32, &sraw), BVS_OK) << bvs_last_error();
  SessionPtr s(sraw);
  bvs_pose pose{};
  ASSERT_EQ(bvs_circle_poses(w.get(), 32, 32, 1, &pose), BVS_OK);
  bvs_render_options ro{};
  bvs_render_options_default(&ro);
  ro.width = ro.height = 6;
  ro.samples = 16;

  auto render_rgb = [&] {
    bvs_frame* f = nullptr;
    EXPECT_EQ(bvs_session_render(s.get(), &pose, &ro, &f, nullptr), BVS_OK) << bvs_last_error();
    FramePtr fp(f);
    std::vector<double> rgb(6 * 6 * 3);
    EXPECT_EQ(bvs_frame_rgb(f, rgb.data(), rgb.size()), BVS_OK);
    return rgb;
  };
  const auto base = render_rgb();
  ASSERT_EQ(bvs_session_set_scene_blend(s.get(), other.get(), 0.0), BVS_OK) << bvs_last_error();
  EXPECT_EQ(render_rgb(), base);
  ASSERT_EQ(bvs_session_set_scene_blend(s.get(), other.get(), 1.0), BVS_OK);
  EXPECT_NE(render_rgb(), base);
  ASSERT_EQ(bvs_session_set_scene_blend(s.get(), nullptr, 0.0), BVS_OK);
  EXPECT_EQ(render_rgb(), base);

  WorldPtr small = make_world(32, 1);
  EXPECT_EQ(bvs_session_set_scene_blend(s.get(), small.get(), 0.5), BVS_ERR_DIMENSION_MISMATCH);
}

TEST(CApi, BlendNeedsModel) {
  WorldPtr w = make_world(64, 4);
  bvs_session* sraw = nullptr;
  ASSERT_EQ(bvs_session_create(w.get(), nullptr, 32, 32, &sraw), BVS_OK);
  SessionPtr s(sraw);
  EXPECT_EQ(bvs_session_set_scene_blend(s.get(), w.get(), 0.5), BVS_ERR_INVALID_ARGUMENT);
}

TEST(CApi, SampledCamerasStayInWindow) {
  WorldPtr w = make_world(128, 6);
  std::vector<bvs_pose> poses(10);
  std::vector<int> accepted(10, -1);
  ASSERT_EQ(bvs_sample_cameras(w.get(), 64, 64, 40, 90, 3, 10, poses.data(), accepted.data()), BVS_OK)
      << bvs_last_error();
  for (std::size_t k = 0; k < poses.size(); ++k) {
    EXPECT_TRUE(accepted[k] == 0 || accepted[k] == 1);
    EXPECT_GE(poses[k].x, 8.0);
    EXPECT_LE(poses[k].x, 72.0);
    EXPECT_GE(poses[k].y, 58.0);
    EXPECT_LE(poses[k].y, 122.0);
  }
}

TEST(CApi, TrajectoryRoundTrip) {
  const std::vector<bvs_pose> poses{{1, 2, 3, 4, 5, 6}, {0.125, -1, 10.5, 3, 3, 0}};
  const std::string path = scratch("t.csv").string();
  ASSERT_EQ(bvs_trajectory_write(path.c_str(), poses.data(), poses.size()), BVS_OK) << bvs_last_error();
  size_t count = 0;
  ASSERT_EQ(bvs_trajectory_read(path.c_str(), nullptr, &count), BVS_OK);
  ASSERT_EQ(count, 2u);
  std::vector<bvs_pose> back(2);
  ASSERT_EQ(bvs_trajectory_read(path.c_str(), back.data(), &count), BVS_OK);
  EXPECT_EQ(0, std::memcmp(back.data(), poses.data(), sizeof(bvs_pose) * 2));
  count = 1;
  EXPECT_EQ(bvs_trajectory_read(path.c_str(), back.data(), &count), BVS_ERR_DIMENSION_MISMATCH);
}

}  // namespace
