// Copyright 2026 The mace-matting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the library only through mace.h.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mace/mace.h"

namespace {

struct ConfigDeleter {
  void operator()(mace_config* c) const { mace_config_destroy(c); }
};
struct ImageDeleter {
  void operator()(mace_image* i) const { mace_image_destroy(i); }
};
struct ReportDeleter {
  void operator()(mace_report* r) const { mace_report_destroy(r); }
};
struct BatchDeleter {
  void operator()(mace_batch* b) const { mace_batch_destroy(b); }
};
struct SynthDeleter {
  void operator()(mace_synth* s) const { mace_synth_destroy(s); }
};
using ConfigPtr = std::unique_ptr<mace_config, ConfigDeleter>;
using ImagePtr = std::unique_ptr<mace_image, ImageDeleter>;
using ReportPtr = std::unique_ptr<mace_report, ReportDeleter>;
using BatchPtr = std::unique_ptr<mace_batch, BatchDeleter>;
using SynthPtr = std::unique_ptr<mace_synth, SynthDeleter>;

// Thrown to unwind to main with a status already reported.
struct Failure {
  int exit_code;
};

void check(mace_status status, const std::string& context) {
  if (status == MACE_OK) return;
  if (context.empty())
    std::fprintf(stderr, "error: %s (%s)\n", mace_last_error(), mace_status_string(status));
  else
    std::fprintf(stderr, "error: %s: %s (%s)\n", context.c_str(), mace_last_error(),
                 mace_status_string(status));
  throw Failure{1};
}

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key = value configuration file");
    cmd->add_option("--set", sets, "override one key, as key=value (repeatable)");
  }

  // File first, then --set values, then validation.
  ConfigPtr build() const {
    mace_config* raw = nullptr;
    check(mace_config_create(&raw), "config");
    ConfigPtr cfg(raw);
    if (!file.empty()) check(mace_config_load(cfg.get(), file.c_str()), "config " + file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
        throw Failure{2};
      }
      check(mace_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
            "--set " + kv);
    }
    check(mace_config_validate(cfg.get()), "");
    return cfg;
  }
};

ImagePtr load(const std::string& path, int channels) {
  mace_image* raw = nullptr;
  check(mace_image_load(path.c_str(), channels, &raw), "load " + path);
  return ImagePtr(raw);
}

void print_report(const mace_report* report) {
  const size_t n = mace_report_frame_count(report);
  for (size_t i = 0; i < n; ++i) {
    const char* id = nullptr;
    double iou = 0, mae = 0, f = 0;
    mace_report_frame(report, i, &id, &iou, &mae, &f);
    std::printf("frame=%s iou=%.6g mae=%.6g contour_f=%.6g\n", id, iou, mae, f);
  }
  double iou = 0, mae = 0, f = 0;
  if (mace_report_aggregate(report, &iou, &mae, &f) == MACE_OK)
    std::printf("aggregate frames=%zu iou=%.6g mae=%.6g contour_f=%.6g\n", n, iou, mae, f);
}

int config_tol(const mace_config* cfg) {
  char buf[64];
  check(mace_config_get(cfg, "contour_tol", buf, sizeof buf, nullptr), "config");
  return std::atoi(buf);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foreground matte extraction against a background plate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mace_version());

  // extract
  auto* extract = app.add_subcommand("extract", "extract one matte");
  ConfigFlags extract_cfg;
  extract_cfg.attach(extract);
  std::string frame, plate, out, gt;
  int bit_depth = 8;
  extract->add_option("--frame", frame, "input frame")->required();
  extract->add_option("--plate", plate, "background plate")->required();
  extract->add_option("--out", out, "output matte (.png or .pgm)")->required();
  extract->add_option("--gt", gt, "ground-truth matte for metrics");
  extract->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  // batch
  auto* batch = app.add_subcommand("batch", "extract a sequence");
  ConfigFlags batch_cfg;
  batch_cfg.attach(batch);
  std::string frames_dir, manifest, out_dir, gt_dir, report_path;
  bool temporal = false;
  batch->add_option("--frames", frames_dir, "directory of frames");
  batch->add_option("--plate", plate, "plate used with --frames");
  batch->add_option("--manifest", manifest, "lines of 'frame plate output [truth]'");
  batch->add_option("--out", out_dir, "output directory used with --frames");
  batch->add_option("--gt", gt_dir, "ground-truth directory used with --frames");
  batch->add_flag("--temporal", temporal, "space-time TV over sliding windows");
  batch->add_option("--report", report_path, "write the metric report here");
  batch->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  // eval
  auto* eval = app.add_subcommand("eval", "score predicted mattes");
  std::string pred;
  int tol = 2;
  eval->add_option("--pred", pred, "matte file or directory")->required();
  eval->add_option("--gt", gt, "truth file or directory")->required();
  eval->add_option("--tol", tol, "contour match radius in pixels")->check(CLI::NonNegativeNumber);
  eval->add_option("--report", report_path, "write the metric report here");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic test sequence");
  mace_scene scene;
  mace_scene_defaults(&scene);
  std::string synth_dir, shape = "square";
  unsigned long long seed = 1;
  synth->add_option("--out", synth_dir, "output directory")->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--frames", scene.frames, "frame count")->check(CLI::PositiveNumber);
  synth->add_option("--width", scene.width, "width")->check(CLI::PositiveNumber);
  synth->add_option("--height", scene.height, "height")->check(CLI::PositiveNumber);
  synth->add_option("--shape", shape, "square or disk")->check(CLI::IsMember({"square", "disk"}));
  synth->add_option("--size", scene.shape_size, "shape side or diameter");
  synth->add_option("--motion-x", scene.motion_x, "pixels per frame");
  synth->add_option("--motion-y", scene.motion_y, "pixels per frame");
  synth->add_option("--brightness", scene.brightness_drift, "plate brightness offset");
  synth->add_option("--noise", scene.noise_sigma, "plate noise sigma");
  synth->add_option("--jitter", scene.jitter_px, "max background shift per frame");
  synth->add_option("--similarity", scene.color_similarity, "foreground blend toward background");
  synth->add_option("--contrast", scene.bg_contrast, "plate texture amplitude");
  synth->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  // config
  auto* show = app.add_subcommand("config", "print the effective configuration");
  ConfigFlags show_cfg;
  show_cfg.attach(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is usage.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*extract) {
      ConfigPtr cfg = extract_cfg.build();
      ImagePtr f = load(frame, 3), p = load(plate, 3);
      mace_image* raw = nullptr;
      mace_extract_stats stats{};
      check(mace_extract(cfg.get(), f.get(), p.get(), &raw, &stats), "extract " + frame);
      ImagePtr matte(raw);
      check(mace_image_save(matte.get(), out.c_str(), bit_depth), "save " + out);
      std::printf("iterations=%d converged=%d residual=%.6g consensus_residual=%.6g "
                  "agent_residual=%.6g equilibrium=%s\n",
                  stats.iterations, stats.converged, stats.final_residual,
                  stats.consensus_residual, stats.max_agent_residual,
                  stats.equilibrium_pass ? "pass" : "fail");
      if (!gt.empty()) {
        ImagePtr truth = load(gt, 1);
        double iou = 0, mae = 0, cf = 0;
        check(mace_metrics(matte.get(), truth.get(), config_tol(cfg.get()), &iou, &mae, &cf),
              "metrics");
        std::printf("iou=%.6g mae=%.6g contour_f=%.6g\n", iou, mae, cf);
      }
    } else if (*batch) {
      ConfigPtr cfg = batch_cfg.build();
      mace_batch* raw = nullptr;
      check(mace_batch_create(&raw), "batch");
      BatchPtr jobs(raw);
      if (!manifest.empty() == !frames_dir.empty()) {
        std::fprintf(stderr, "error: batch needs exactly one of --frames or --manifest\n");
        return 2;
      }
      if (!manifest.empty()) {
        check(mace_batch_add_manifest(jobs.get(), manifest.c_str()), "manifest " + manifest);
      } else {
        if (plate.empty() || out_dir.empty()) {
          std::fprintf(stderr, "error: --frames needs --plate and --out\n");
          return 2;
        }
        check(mace_batch_add_directory(jobs.get(), frames_dir.c_str(), plate.c_str(),
                                       out_dir.c_str(), gt_dir.empty() ? nullptr : gt_dir.c_str()),
              "frames " + frames_dir);
      }
      mace_report* rep_raw = nullptr;
      const mace_status status =
          mace_batch_run(jobs.get(), cfg.get(), temporal ? 1 : 0, bit_depth, &rep_raw);
      ReportPtr report(rep_raw);
      if (report) {
        print_report(report.get());
        for (size_t i = 0; i < mace_report_failure_count(report.get()); ++i)
          std::fprintf(stderr, "frame failed: %s\n", mace_report_failure(report.get(), i));
        if (!report_path.empty())
          check(mace_report_write(report.get(), report_path.c_str()), "report " + report_path);
      }
      check(status, "batch");
    } else if (*eval) {
      mace_report* raw = nullptr;
      check(mace_evaluate_paths(pred.c_str(), gt.c_str(), tol, &raw), "eval");
      ReportPtr report(raw);
      print_report(report.get());
      if (!report_path.empty())
        check(mace_report_write(report.get(), report_path.c_str()), "report " + report_path);
    } else if (*synth) {
      scene.shape = shape == "disk" ? 1 : 0;
      mace_synth* raw = nullptr;
      check(mace_synth_create(&scene, seed, &raw), "synth");
      SynthPtr seq(raw);
      check(mace_synth_write(seq.get(), synth_dir.c_str(), bit_depth), "synth " + synth_dir);
      std::printf("wrote %d frames to %s\n", mace_synth_frame_count(seq.get()), synth_dir.c_str());
    } else if (*show) {
      ConfigPtr cfg = show_cfg.build();
      for (size_t i = 0; i < mace_config_key_count(); ++i) {
        const char* key = mace_config_key(i);
        char buf[128];
        check(mace_config_get(cfg.get(), key, buf, sizeof buf, nullptr), key);
        std::printf("%s = %s\n", key, buf);
      }
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return 0;
}
