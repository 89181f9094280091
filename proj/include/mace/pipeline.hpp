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

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mace/background.hpp"
#include "mace/consensus.hpp"
#include "mace/matting.hpp"
#include "mace/metrics.hpp"
#include "mace/raster.hpp"
#include "mace/tv.hpp"

namespace mace {

struct PipelineConfig {
  double lambda1 = 0.01;
  double lambda2 = 2.0;
  double lambda3 = 4.0;
  double gamma = 0.05;
  double tauA = 0.01;
  double tauTheta = 0.02;
  double sigma_delta = 10.0;
  double kappa = 30.0;
  double theta = 0.8;
  double hs = 5.0;
  double hr = 5.0;
  TvWeights beta_spatial{1.0, 1.0, 0.0};
  TvWeights beta_temporal{1.0, 1.0, 0.25};

  double eta = 0.03;
  double eps = 1e-7;
  double tol = 1e-4;
  int max_iter = 30;
  double mann_weight = 1.0;
  double flood_tol = 0.05;
  int temporal_window = 5;
  int contour_tol = 2;

  double intensity_scale = 255.0;
  int bilateral_radius = 2;
  double cg_tol = 1e-6;
  int cg_max_iter = 2000;
  double tv_inner_tol = 1e-5;
  int tv_inner_max = 5000;
  bool parallel_agents = true;

  // Throws Error(invalid_argument) naming the offending key.
  void validate() const;
  // Sets one field from its text form; unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
  std::vector<std::string> keys() const;
  std::string get(const std::string& key) const;

  BackgroundParams background_params() const;
  MattingParams matting_params() const;
  LaplacianOptions laplacian_options() const;
  TvOptions tv_options(bool temporal) const;
  IterationOptions iteration_options() const;
};

// "key = value" lines; '#' starts a comment. Applied on top of `base`.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});

struct FrameResult {
  Matte matte;  // clamped to [0,1]
  EquilibriumReport report;
  EquilibriumDiagnostics diagnostics;
};

// Hook to alter a frame's background prior r0 before iteration starts.
using PriorHook = std::function<void(int frame_index, Matte& r0)>;

FrameResult extract_frame(const Image& frame, const Image& plate,
                          const PipelineConfig& cfg, int frame_index = 0,
                          const PriorHook& hook = {});

struct SequenceResult {
  std::vector<std::optional<FrameResult>> frames;
  std::vector<std::string> errors;  // empty string where the frame succeeded
  bool ok() const;
};

// Spatial mode runs every frame on its own; temporal mode solves sliding
// volumes of cfg.temporal_window frames and keeps each frame's own slice
// from the window centred on it (shifted inward at the ends).
SequenceResult run_sequence(const std::vector<Image>& frames,
                            const std::vector<Image>& plates,
                            const PipelineConfig& cfg, bool temporal,
                            const PriorHook& hook = {});

struct FrameJob {
  std::string frame_path;
  std::string plate_path;
  std::string output_path;
  std::optional<std::string> truth_path;
  int frame_index = 0;
};

struct BatchResult {
  SequenceResult sequence;
  MetricReport metrics;  // frames with ground truth only
  bool has_metrics = false;
  std::string first_failure;
  bool ok() const { return first_failure.empty(); }
};

// Jobs are processed in lexicographic frame-path order.
BatchResult run_batch(std::vector<FrameJob> jobs, const PipelineConfig& cfg,
                      bool temporal, int bit_depth = 8,
                      const PriorHook& hook = {});

// Manifest lines: "frame plate output [truth]", '#' comments.
std::vector<FrameJob> read_manifest(const std::string& path);
// Every .png/.pgm/.ppm in `frames_dir`, sorted; truth matched by filename.
std::vector<FrameJob> jobs_from_directory(const std::string& frames_dir,
                                          const std::string& plate_path,
                                          const std::string& output_dir,
                                          const std::string& truth_dir = {});

// Pairs two files, or every image of `pred_dir` with the same filename under
// `truth_dir`. Frame ids are filename stems.
MetricReport evaluate_paths(const std::string& pred, const std::string& truth,
                            int tol_px);

}  // namespace mace
