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

#include "mace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mace/error.hpp"

namespace mace {
namespace {

std::vector<unsigned char> binarize(const Matte& m) {
  std::vector<unsigned char> b(m.pixel_count());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = m.values()[i] >= 0.5 ? 1 : 0;
  return b;
}

// Foreground pixels with a 4-neighbour in the background.
std::vector<unsigned char> boundary(const std::vector<unsigned char>& mask, int w,
                                    int h) {
  std::vector<unsigned char> out(mask.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!mask[i]) continue;
      const bool edge = (x > 0 && !mask[i - 1]) || (x + 1 < w && !mask[i + 1]) ||
                        (y > 0 && !mask[i - w]) || (y + 1 < h && !mask[i + w]);
      out[i] = edge ? 1 : 0;
    }
  return out;
}

std::vector<unsigned char> dilate_disk(const std::vector<unsigned char>& map, int w,
                                       int h, int radius) {
  std::vector<unsigned char> out(map.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!map[static_cast<std::size_t>(y) * w + x]) continue;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          out[static_cast<std::size_t>(ny) * w + nx] = 1;
        }
    }
  return out;
}

// Fraction of `from` pixels covered by `cover`.
double matched_fraction(const std::vector<unsigned char>& from,
                        const std::vector<unsigned char>& cover) {
  double total = 0.0, hit = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!from[i]) continue;
    total += 1.0;
    if (cover[i]) hit += 1.0;
  }
  return total > 0.0 ? hit / total : 0.0;
}

}  // namespace

double iou(const Matte& pred, const Matte& gt) {
  require_same_size(pred, gt, "iou");
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    inter += std::min(pred.values()[i], gt.values()[i]);
    uni += std::max(pred.values()[i], gt.values()[i]);
  }
  return uni > 0.0 ? inter / uni : 1.0;
}

double mae(const Matte& pred, const Matte& gt) {
  require_same_size(pred, gt, "mae");
  if (pred.pixel_count() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i)
    s += std::abs(pred.values()[i] - gt.values()[i]);
  return s / static_cast<double>(pred.pixel_count());
}

double contour_f(const Matte& pred, const Matte& gt, int tol_px) {
  require_same_size(pred, gt, "contour_f");
  if (tol_px < 0) throw Error(ErrorCode::invalid_argument, "contour_f: tol_px < 0");
  const int w = pred.width(), h = pred.height();
  const auto bp = boundary(binarize(pred), w, h);
  const auto bg = boundary(binarize(gt), w, h);
  const bool any_p = std::find(bp.begin(), bp.end(), 1) != bp.end();
  const bool any_g = std::find(bg.begin(), bg.end(), 1) != bg.end();
  if (!any_p && !any_g) return 1.0;
  if (!any_p || !any_g) return 0.0;
  const double precision = matched_fraction(bp, dilate_disk(bg, w, h, tol_px));
  const double recall = matched_fraction(bg, dilate_disk(bp, w, h, tol_px));
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

void MetricReport::add(FrameMetrics m) {
  frames.push_back(std::move(m));
  finalize();
}

void MetricReport::finalize() {
  iou = mae = contour_f = 0.0;
  if (frames.empty()) return;
  for (const auto& f : frames) {
    iou += f.iou;
    mae += f.mae;
    contour_f += f.contour_f;
  }
  const double n = static_cast<double>(frames.size());
  iou /= n;
  mae /= n;
  contour_f /= n;
}

FrameMetrics evaluate_frame(const std::string& frame_id, const Matte& pred,
                            const Matte& gt, int tol_px) {
  FrameMetrics m;
  m.frame_id = frame_id;
  m.iou = iou(pred, gt);
  m.mae = mae(pred, gt);
  m.contour_f = contour_f(pred, gt, tol_px);
  return m;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_report(const MetricReport& report, std::ostream& out) {
  for (const auto& f : report.frames)
    out << "frame=" << f.frame_id << " iou=" << format_number(f.iou)
        << " mae=" << format_number(f.mae)
        << " contour_f=" << format_number(f.contour_f) << '\n';
  out << "aggregate frames=" << report.frames.size()
      << " iou=" << format_number(report.iou) << " mae=" << format_number(report.mae)
      << " contour_f=" << format_number(report.contour_f) << '\n';
}

MetricReport read_report(std::istream& in) {
  MetricReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("frame=", 0) != 0) continue;
    std::istringstream fields(line);
    std::string token;
    FrameMetrics m;
    while (fields >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
      if (key == "frame") m.frame_id = value;
      else if (key == "iou") m.iou = std::stod(value);
      else if (key == "mae") m.mae = std::stod(value);
      else if (key == "contour_f") m.contour_f = std::stod(value);
    }
    report.frames.push_back(std::move(m));
  }
  report.finalize();
  return report;
}

}  // namespace mace
