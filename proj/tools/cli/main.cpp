// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// bevscape command line. Talks to the engine only through the C API.
//
// Settings come from flags or from a config file given with --config, one
// `subcommand.option = value` per line (e.g. `render.samples = 48`); flags
// override the file and unknown keys are rejected.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "bevscape/bevscape.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bvs_status s, const std::string& what) {
  if (s == BVS_OK) return;
  const std::string msg = what + ": " + bvs_status_name(s) + ": " + bvs_last_error();
  if (s == BVS_ERR_INVALID_ARGUMENT) throw UsageError(msg);
  throw RuntimeError(msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using WorldPtr = std::unique_ptr<bvs_world, Deleter<bvs_world, bvs_world_free>>;
using ModelPtr = std::unique_ptr<bvs_model, Deleter<bvs_model, bvs_model_free>>;
using SessionPtr = std::unique_ptr<bvs_session, Deleter<bvs_session, bvs_session_free>>;
using FramePtr = std::unique_ptr<bvs_frame, Deleter<bvs_frame, bvs_frame_free>>;

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

WorldPtr load_world(const std::string& path, int* h_w = nullptr) {
  bvs_world* w = nullptr;
  check(bvs_world_load(path.c_str(), &w, h_w), "loading " + path);
  return WorldPtr(w);
}

ModelPtr load_model(const std::string& path) {
  if (path.empty()) return nullptr;
  bvs_model* m = nullptr;
  check(bvs_model_load(path.c_str(), &m), "loading " + path);
  return ModelPtr(m);
}

bvs_pose parse_pose(const std::vector<double>& v) {
  if (v.size() != 6) throw UsageError("--pose expects x,y,z,tx,ty,tz");
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

// Shared by every command that renders frames.
struct RenderArgs {
  std::string world;
  std::string checkpoint;
  std::string palette;
  int n_w = 128;
  int h_w = 0;  // 0: taken from the world file
  std::optional<uint64_t> style;
  bvs_render_options ro{};

  void add(CLI::App* app) {
    bvs_render_options_default(&ro);
    app->add_option("--world", world, "BEV world file")->required();
    app->add_option("--checkpoint", checkpoint, "model checkpoint; omitted renders the procedural surrogate");
    app->add_option("--palette", palette, "palette asset for label images");
    app->add_option("--n-w", n_w, "window side in voxels")->capture_default_str();
    app->add_option("--h-w", h_w, "window height in voxels (default: from the world file)");
    app->add_option("--style", style, "replace the checkpoint's style code with the one sampled from this seed");
    app->add_option("--width", ro.width, "image width")->capture_default_str();
    app->add_option("--height", ro.height, "image height")->capture_default_str();
    app->add_option("--fov", ro.fov_y, "vertical field of view, radians")->capture_default_str();
    app->add_option("--samples", ro.samples, "samples per ray")->capture_default_str();
    app->add_option("--render-seed", ro.seed, "stratification seed")->capture_default_str();
    app->add_option("--threads", ro.threads, "render threads, 0 for all")->capture_default_str();
  }
};

struct Scene {
  WorldPtr world;
  ModelPtr model;
  SessionPtr session;
  int n_w = 0;
  int h_w = 0;
};

Scene open_scene(const RenderArgs& a) {
  Scene s;
  int file_h_w = 0;
  s.world = load_world(a.world, &file_h_w);
  s.model = load_model(a.checkpoint);
  if (a.style) {
    if (!s.model) throw UsageError("--style needs --checkpoint");
    std::vector<double> z(BVS_STYLE_DIM);
    check(bvs_style_sample(*a.style, z.data()), "sampling style");
    check(bvs_model_set_style(s.model.get(), z.data()), "setting style");
  }
  s.h_w = a.h_w > 0 ? a.h_w : file_h_w;
  s.n_w = std::min(a.n_w, bvs_world_size(s.world.get()));
  bvs_session* sess = nullptr;
  check(bvs_session_create(s.world.get(), s.model.get(), s.n_w, s.h_w, &sess), "creating render session");
  s.session.reset(sess);
  return s;
}

FramePtr render(Scene& s, const bvs_pose& pose, const bvs_render_options& ro) {
  bvs_frame* f = nullptr;
  check(bvs_session_render(s.session.get(), &pose, &ro, &f, nullptr), "rendering");
  return FramePtr(f);
}

void write_frame(const bvs_frame* f, const std::string& prefix, const std::string& palette) {
  check(bvs_frame_write_ppm(f, BVS_IMAGE_RGB, (prefix + "_rgb.ppm").c_str(), nullptr), "writing image");
  check(bvs_frame_write_ppm(f, BVS_IMAGE_DEPTH, (prefix + "_depth.ppm").c_str(), nullptr), "writing image");
  check(bvs_frame_write_ppm(f, BVS_IMAGE_LABEL, (prefix + "_label.ppm").c_str(), opt(palette)), "writing image");
}

std::string frame_name(const std::string& dir, const char* stem, int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d", stem, k);
  return (fs::path(dir) / buf).string();
}

std::vector<bvs_pose> trajectory(Scene& s, int circle, const std::string& csv) {
  if ((circle > 0) == !csv.empty()) throw UsageError("give exactly one of --circle N or --trajectory FILE");
  std::vector<bvs_pose> poses;
  if (circle > 0) {
    poses.resize(circle);
    check(bvs_circle_poses(s.world.get(), s.n_w, s.h_w, circle, poses.data()), "building circle trajectory");
  } else {
    size_t count = 0;
    check(bvs_trajectory_read(csv.c_str(), nullptr, &count), "reading " + csv);
    poses.resize(count);
    check(bvs_trajectory_read(csv.c_str(), poses.data(), &count), "reading " + csv);
    if (poses.empty()) throw UsageError("trajectory file holds no poses");
  }
  return poses;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create directory " + dir + ": " + ec.message());
}

std::vector<double> style_for(uint64_t seed) {
  std::vector<double> z(BVS_STYLE_DIM);
  check(bvs_style_sample(seed, z.data()), "sampling style");
  return z;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bevscape: procedural BEV landscapes rendered through a style-modulated radiance field"};
  app.set_config("--config", "", "settings file of `subcommand.option = value` lines");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bvs_version()));

  // worldgen
  auto* wg = app.add_subcommand("worldgen", "generate a BEV world file and preview images");
  uint64_t wg_seed = 0;
  int wg_n = 512, wg_h_w = 128;
  std::string wg_out, wg_lut, wg_rules, wg_palette, wg_preview;
  wg->add_option("--seed", wg_seed, "world seed")->capture_default_str();
  wg->add_option("--n", wg_n, "side length, power of two")->capture_default_str();
  wg->add_option("--h-w", wg_h_w, "vertical extent stored with the world")->capture_default_str();
  wg->add_option("-o,--output", wg_out, "output .bev file")->required();
  wg->add_option("--lut", wg_lut, "biome LUT asset");
  wg->add_option("--rules", wg_rules, "label rule asset");
  wg->add_option("--palette", wg_palette, "palette asset for the label preview");
  wg->add_option("--preview", wg_preview, "prefix for <prefix>_height.ppm and <prefix>_labels.ppm");

  // render
  auto* rd = app.add_subcommand("render", "render one pose");
  RenderArgs rd_args;
  rd_args.add(rd);
  std::vector<double> rd_pose;
  std::string rd_out;
  rd->add_option("--pose", rd_pose, "x,y,z,tx,ty,tz in world voxels")->delimiter(',')->required()->expected(6);
  rd->add_option("-o,--output", rd_out, "output prefix")->required();

  // render-traj
  auto* rt = app.add_subcommand("render-traj", "render a trajectory with sliding windows");
  RenderArgs rt_args;
  rt_args.add(rt);
  int rt_circle = 0;
  std::string rt_csv, rt_out;
  rt->add_option("--circle", rt_circle, "evaluation orbit with N poses");
  rt->add_option("--trajectory", rt_csv, "trajectory CSV, x,y,z,tx,ty,tz per line");
  rt->add_option("-o,--output", rt_out, "output directory")->required();

  // sample-cams
  auto* sc = app.add_subcommand("sample-cams", "rejection-sample training cameras");
  std::string sc_world, sc_out;
  int sc_n_w = 128, sc_h_w = 0, sc_count = 16;
  uint64_t sc_seed = 0;
  std::vector<double> sc_center;
  sc->add_option("--world", sc_world, "BEV world file")->required();
  sc->add_option("--n-w", sc_n_w, "window side")->capture_default_str();
  sc->add_option("--h-w", sc_h_w, "window height (default: from the world file)");
  sc->add_option("--center", sc_center, "window center x,y (default: world center)")->delimiter(',')->expected(2);
  sc->add_option("--count", sc_count, "number of poses")->capture_default_str();
  sc->add_option("--seed", sc_seed, "sampling seed")->capture_default_str();
  sc->add_option("-o,--output", sc_out, "output trajectory CSV")->required();

  // train-toy
  auto* tt = app.add_subcommand("train-toy", "reconstruction training against the procedural colorization");
  bvs_train_config tc{};
  bvs_train_config_default(&tc);
  std::string tt_world, tt_resume, tt_out, tt_loss;
  tt->add_option("--world", tt_world, "BEV world file")->required();
  tt->add_option("--resume", tt_resume, "continue from this checkpoint");
  tt->add_option("-o,--output", tt_out, "output checkpoint")->required();
  tt->add_option("--loss-csv", tt_loss, "per-iteration loss CSV");
  tt->add_option("--iterations", tc.iterations, "training steps")->capture_default_str();
  tt->add_option("--patch", tc.patch, "square patch side")->capture_default_str();
  tt->add_option("--samples", tc.samples, "samples per ray")->capture_default_str();
  tt->add_option("--fov", tc.fov_y, "vertical field of view, radians")->capture_default_str();
  tt->add_option("--lr-encoder", tc.lr_encoder)->capture_default_str();
  tt->add_option("--lr-hash", tc.lr_hash)->capture_default_str();
  tt->add_option("--lr-field", tc.lr_field)->capture_default_str();
  tt->add_option("--mse-weight", tc.mse_weight)->capture_default_str();
  tt->add_option("--seed", tc.seed, "training seed")->capture_default_str();
  tt->add_option("--style-seed", tc.style_seed, "style code seed")->capture_default_str();
  tt->add_option("--n-w", tc.n_w, "window side")->capture_default_str();
  tt->add_option("--h-w", tc.h_w, "window height")->capture_default_str();
  tt->add_option("--hidden", tc.hidden, "field width")->capture_default_str();
  tt->add_option("--hash-levels", tc.hash_levels)->capture_default_str();
  tt->add_option("--hash-log2-table", tc.hash_log2_table)->capture_default_str();
  tt->add_option("--hash-channels", tc.hash_channels)->capture_default_str();
  tt->add_option("--hash-n-min", tc.hash_n_min)->capture_default_str();
  tt->add_option("--hash-n-max", tc.hash_n_max)->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "depth, reprojection and entropy metrics along a trajectory");
  RenderArgs ev_args;
  ev_args.add(ev);
  int ev_circle = 0;
  std::string ev_csv, ev_report;
  ev->add_option("--circle", ev_circle, "evaluation orbit with N poses");
  ev->add_option("--trajectory", ev_csv, "trajectory CSV");
  ev->add_option("--report", ev_report, "JSON-lines report (default: stdout)");

  // interp
  auto* ip = app.add_subcommand("interp", "style and scene interpolation grid");
  RenderArgs ip_args;
  ip_args.add(ip);
  std::vector<uint64_t> ip_styles;
  int ip_steps = 5;
  std::string ip_scene, ip_out;
  std::vector<double> ip_pose;
  ip->add_option("--styles", ip_styles, "two style seeds A,B")->delimiter(',')->expected(2)->required();
  ip->add_option("--steps", ip_steps, "frames per axis")->capture_default_str();
  ip->add_option("--scene", ip_scene, "second world; adds a scene-feature axis");
  ip->add_option("--pose", ip_pose, "x,y,z,tx,ty,tz (default: first evaluation-orbit pose)")
      ->delimiter(',')->expected(6);
  ip->add_option("-o,--output", ip_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*wg) {
      bvs_world_params p{};
      check(bvs_world_params_default(wg_n, wg_seed, &p), "world parameters");
      bvs_world* w = nullptr;
      check(bvs_world_generate(&p, opt(wg_lut), opt(wg_rules), &w), "generating world");
      WorldPtr world(w);
      check(bvs_world_save(world.get(), wg_h_w, wg_out.c_str()), "writing " + wg_out);
      if (!wg_preview.empty()) {
        check(bvs_world_write_previews(world.get(), (wg_preview + "_height.ppm").c_str(),
                                       (wg_preview + "_labels.ppm").c_str(), opt(wg_palette)),
              "writing previews");
      }
      std::cout << "wrote " << wg_out << " (n=" << wg_n << ")\n";
    } else if (*rd) {
      Scene s = open_scene(rd_args);
      FramePtr f = render(s, parse_pose(rd_pose), rd_args.ro);
      write_frame(f.get(), rd_out, rd_args.palette);
    } else if (*rt) {
      Scene s = open_scene(rt_args);
      const auto poses = trajectory(s, rt_circle, rt_csv);
      ensure_dir(rt_out);
      if (rt_circle > 0)
        check(bvs_trajectory_write((fs::path(rt_out) / "trajectory.csv").c_str(), poses.data(), poses.size()),
              "writing trajectory");
      for (std::size_t k = 0; k < poses.size(); ++k) {
        int rebound = 0;
        bvs_frame* f = nullptr;
        check(bvs_session_render(s.session.get(), &poses[k], &rt_args.ro, &f, &rebound), "rendering");
        FramePtr frame(f);
        write_frame(frame.get(), frame_name(rt_out, "frame", static_cast<int>(k)), rt_args.palette);
        std::cout << "frame " << k << (rebound ? " (window rebound)" : "") << "\n";
      }
    } else if (*sc) {
      int file_h_w = 0;
      WorldPtr world = load_world(sc_world, &file_h_w);
      const int n = bvs_world_size(world.get());
      const double cx = sc_center.empty() ? 0.5 * n : sc_center[0];
      const double cy = sc_center.empty() ? 0.5 * n : sc_center[1];
      if (sc_count < 1) throw UsageError("--count must be positive");
      std::vector<bvs_pose> poses(sc_count);
      std::vector<int> accepted(sc_count);
      check(bvs_sample_cameras(world.get(), std::min(sc_n_w, n), sc_h_w > 0 ? sc_h_w : file_h_w, cx, cy, sc_seed,
                               sc_count, poses.data(), accepted.data()),
            "sampling cameras");
      check(bvs_trajectory_write(sc_out.c_str(), poses.data(), poses.size()), "writing " + sc_out);
      int ok = 0;
      for (int a : accepted) ok += a;
      std::cout << ok << " of " << sc_count << " poses passed the rejection thresholds\n";
    } else if (*tt) {
      WorldPtr world = load_world(tt_world);
      ModelPtr resume = load_model(tt_resume);
      std::ofstream loss;
      if (!tt_loss.empty()) {
        loss.open(tt_loss);
        if (!loss) throw RuntimeError("cannot create " + tt_loss);
        loss << "iteration,loss\n";
        loss.precision(17);
      }
      struct Sink {
        std::ofstream* csv;
        int total;
      } sink{loss.is_open() ? &loss : nullptr, tc.iterations};
      auto cb = [](int64_t it, double l, void* user) {
        auto* s = static_cast<Sink*>(user);
        if (s->csv) *s->csv << it << ',' << l << '\n';
        if (it % 50 == 0) std::cout << "iteration " << it << " loss " << l << std::endl;
      };
      bvs_model* m = nullptr;
      check(bvs_train(world.get(), &tc, resume.get(), cb, &sink, &m), "training");
      ModelPtr model(m);
      check(bvs_model_save(model.get(), tt_out.c_str()), "writing " + tt_out);
      std::cout << "wrote " << tt_out << " at iteration " << bvs_model_iteration(model.get()) << "\n";
    } else if (*ev) {
      Scene s = open_scene(ev_args);
      const auto poses = trajectory(s, ev_circle, ev_csv);
      std::ofstream file;
      if (!ev_report.empty()) {
        file.open(ev_report);
        if (!file) throw RuntimeError("cannot create " + ev_report);
      }
      std::ostream& out = ev_report.empty() ? std::cout : file;
      auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
      FramePtr prev;
      double sum_depth = 0, sum_entropy = 0, sum_reproj = 0;
      int n_depth = 0, n_reproj = 0;
      for (std::size_t k = 0; k < poses.size(); ++k) {
        FramePtr f = render(s, poses[k], ev_args.ro);
        bvs_frame_metrics m{};
        check(bvs_frame_evaluate(s.world.get(), f.get(), &m), "evaluating frame");
        nlohmann::json row{{"frame", k},
                           {"depth_error", num(m.depth_error)},
                           {"valid_fraction", m.valid_fraction},
                           {"label_entropy", m.label_entropy},
                           {"mean_depth", num(m.mean_depth)}};
        if (prev) {
          double err = 0, frac = 0;
          check(bvs_frame_reprojection(prev.get(), f.get(), &err, &frac), "reprojection");
          row["reprojection_error"] = num(err);
          row["reprojection_fraction"] = frac;
          if (std::isfinite(err)) {
            sum_reproj += err;
            ++n_reproj;
          }
        }
        if (std::isfinite(m.depth_error)) {
          sum_depth += m.depth_error;
          ++n_depth;
        }
        sum_entropy += m.label_entropy;
        out << row.dump() << "\n";
        prev = std::move(f);
      }
      nlohmann::json summary{{"summary", true},
                             {"frames", poses.size()},
                             {"depth_error", n_depth ? num(sum_depth / n_depth) : nlohmann::json(nullptr)},
                             {"label_entropy", sum_entropy / static_cast<double>(poses.size())},
                             {"reprojection_error", n_reproj ? num(sum_reproj / n_reproj) : nlohmann::json(nullptr)}};
      out << summary.dump() << "\n";
    } else if (*ip) {
      if (ip_args.checkpoint.empty()) throw UsageError("interp needs --checkpoint");
      if (ip_steps < 1) throw UsageError("--steps must be positive");
      Scene s = open_scene(ip_args);
      WorldPtr other;
      if (!ip_scene.empty()) other = load_world(ip_scene);
      bvs_pose pose;
      if (!ip_pose.empty()) {
        pose = parse_pose(ip_pose);
      } else {
        check(bvs_circle_poses(s.world.get(), s.n_w, s.h_w, 1, &pose), "building default pose");
      }
      ensure_dir(ip_out);
      const auto za = style_for(ip_styles[0]);
      const auto zb = style_for(ip_styles[1]);
      const int scene_steps = other ? ip_steps : 1;
      for (int a = 0; a < scene_steps; ++a) {
        const double ta = scene_steps > 1 ? static_cast<double>(a) / (scene_steps - 1) : 0.0;
        check(bvs_session_set_scene_blend(s.session.get(), other.get(), ta), "blending scene features");
        for (int b = 0; b < ip_steps; ++b) {
          const double tb = ip_steps > 1 ? static_cast<double>(b) / (ip_steps - 1) : 0.0;
          std::vector<double> z(BVS_STYLE_DIM);
          for (int k = 0; k < BVS_STYLE_DIM; ++k) z[k] = (1.0 - tb) * za[k] + tb * zb[k];
          check(bvs_model_set_style(s.model.get(), z.data()), "setting style");
          FramePtr f = render(s, pose, ip_args.ro);
          char stem[48];
          std::snprintf(stem, sizeof stem, "interp_s%02d_z%02d_rgb.ppm", a, b);
          check(bvs_frame_write_ppm(f.get(), BVS_IMAGE_RGB, (fs::path(ip_out) / stem).c_str(), nullptr),
                "writing image");
        }
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
