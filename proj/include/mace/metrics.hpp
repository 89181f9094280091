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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mace/raster.hpp"

namespace mace {

// Soft IoU: sum min / sum max. Two all-zero mattes score 1.
double iou(const Matte& pred, const Matte& gt);
double mae(const Matte& pred, const Matte& gt);
// Boundary F-measure of the 0.5-binarised masks, boundaries matched within
// a disk of radius tol_px.
double contour_f(const Matte& pred, const Matte& gt, int tol_px = 2);

struct FrameMetrics {
  std::string frame_id;
  double iou = 0.0;
  double mae = 0.0;
  double contour_f = 0.0;
  // Not computed; kept so reports can grow structure/stability columns.
  std::optional<double> structure;
  std::optional<double> temporal_instability;
};

struct MetricReport {
  std::vector<FrameMetrics> frames;
  double iou = 0.0;
  double mae = 0.0;
  double contour_f = 0.0;

  void add(FrameMetrics m);
  // Recomputes the aggregate means.
  void finalize();
};

FrameMetrics evaluate_frame(const std::string& frame_id, const Matte& pred,
                            const Matte& gt, int tol_px = 2);

// frame=<id> iou=<v> mae=<v> contour_f=<v>, then one aggregate line.
void write_report(const MetricReport& report, std::ostream& out);
MetricReport read_report(std::istream& in);

std::string format_number(double value);

}  // namespace mace
