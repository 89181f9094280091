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

#include "mace/background.hpp"

#include <cmath>
#include <deque>

#include "mace/error.hpp"

namespace mace {
namespace {

double sq_dist(const Image& a, int ax, int ay, const Image& b, int bx, int by,
               double scale) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d = scale * (a(ax, ay, c) - b(bx, by, c));
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<double> bilateral_weights(const Image& frame, int x, int y,
                                      double hs, double hr, int radius,
                                      double intensity_scale) {
  std::vector<double> w;
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int nx = x + dx, ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= frame.width() || ny >= frame.height()) continue;
      const double spatial = (dx * dx + dy * dy) / (2.0 * hs * hs);
      const double range = sq_dist(frame, x, y, frame, nx, ny, intensity_scale) /
                           (2.0 * hr * hr);
      const double v = std::exp(-spatial - range);
      w.push_back(v);
      total += v;
    }
  for (double& v : w) v /= total;
  return w;
}

Matte bilateral_color_distance(const Image& frame, const Image& plate,
                               double hs, double hr, int radius,
                               double intensity_scale) {
  require_same_size(frame, plate, "bilateral_color_distance");
  if (!(hs > 0.0) || !(hr > 0.0))
    throw Error(ErrorCode::invalid_argument, "bilateral: hs and hr must be > 0");
  if (radius < 0)
    throw Error(ErrorCode::invalid_argument, "bilateral: radius must be >= 0");

  const int w = frame.width(), h = frame.height();
  Matte diff(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      diff(x, y) = sq_dist(frame, x, y, plate, x, y, intensity_scale);

  Matte delta(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto weights = bilateral_weights(frame, x, y, hs, hr, radius, intensity_scale);
      double acc = 0.0;
      std::size_t k = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          acc += weights[k++] * diff(nx, ny);
        }
      delta(x, y) = acc;
    }
  return delta;
}

Matte color_term(const Matte& delta, double sigma_delta) {
  if (!(sigma_delta > 0.0))
    throw Error(ErrorCode::invalid_argument, "color_term: sigma_delta must be > 0");
  Matte rc(delta.width(), delta.height());
  const double denom = 2.0 * sigma_delta * sigma_delta;
  for (std::size_t i = 0; i < rc.pixel_count(); ++i) {
    const double d = delta.values()[i];
    rc.values()[i] = 1.0 - std::exp(-(d * d) / denom);
  }
  return rc;
}

LabelRaster flood_fill_superpixels(const Image& image, double color_tol) {
  if (!(color_tol >= 0.0))
    throw Error(ErrorCode::invalid_argument, "flood fill: color_tol must be >= 0");
  const int w = image.width(), h = image.height();
  LabelRaster out;
  out.width = w;
  out.height = h;
  out.labels.assign(image.pixel_count(), -1);
  const double tol2 = color_tol * color_tol;

  std::deque<std::pair<int, int>> queue;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      if (out.labels[image.index(sx, sy)] >= 0) continue;
      const int label = out.count++;
      out.labels[image.index(sx, sy)] = label;
      queue.emplace_back(sx, sy);
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + kDx[k], ny = y + kDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          int& slot = out.labels[image.index(nx, ny)];
          if (slot >= 0) continue;
          if (sq_dist(image, nx, ny, image, sx, sy, 1.0) > tol2) continue;
          slot = label;
          queue.emplace_back(nx, ny);
        }
      }
    }
  return out;
}

GradientField gradient_field(const Image& frame, const Image& plate) {
  require_same_size(frame, plate, "gradient_field");
  const int w = frame.width(), h = frame.height();
  GradientField g;
  g.width = w;
  g.height = h;
  g.theta.resize(frame.pixel_count());
  g.amp.resize(frame.pixel_count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Forward difference; the replicated border sample gives zero.
      const int xn = std::min(x + 1, w - 1), yn = std::min(y + 1, h - 1);
      double gi = 0.0, gp = 0.0, gd = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double ix = frame(xn, y, c) - frame(x, y, c);
        const double iy = frame(x, yn, c) - frame(x, y, c);
        const double px = plate(xn, y, c) - plate(x, y, c);
        const double py = plate(x, yn, c) - plate(x, y, c);
        gi += ix * ix + iy * iy;
        gp += px * px + py * py;
        gd += (ix - px) * (ix - px) + (iy - py) * (iy - py);
      }
      const std::size_t i = frame.index(x, y);
      g.theta[i] = std::sqrt(gd);
      g.amp[i] = std::max(std::sqrt(gi), std::sqrt(gp));
    }
  return g;
}

Matte edge_term(const Image& frame, const Image& plate,
                const LabelRaster& labels, double tauA, double tauTheta) {
  require_same_size(frame, plate, "edge_term");
  if (labels.width != frame.width() || labels.height != frame.height())
    throw Error(ErrorCode::dimension_mismatch, "edge_term: label raster size");
  if (!(tauA > 0.0) || !(tauTheta > 0.0))
    throw Error(ErrorCode::invalid_argument, "edge_term: thresholds must be > 0");

  const GradientField g = gradient_field(frame, plate);
  std::vector<double> strong(static_cast<std::size_t>(labels.count), 0.0);
  std::vector<double> differing(static_cast<std::size_t>(labels.count), 0.0);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (!(g.amp[i] > tauA)) continue;
    const auto s = static_cast<std::size_t>(labels.labels[i]);
    strong[s] += 1.0;
    if (g.theta[i] > tauTheta) differing[s] += 1.0;
  }
  Matte re(frame.width(), frame.height());
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto s = static_cast<std::size_t>(labels.labels[i]);
    re.values()[i] = strong[s] > 0.0 ? differing[s] / strong[s] : 0.0;
  }
  return re;
}

BackgroundPrior build_background_prior(const Image& frame, const Image& plate,
                                       const BackgroundParams& params) {
  BackgroundPrior prior;
  prior.params = params;
  prior.delta = bilateral_color_distance(frame, plate, params.hs, params.hr,
                                         params.radius, params.intensity_scale);
  prior.rc = color_term(prior.delta, params.sigma_delta);
  prior.superpixels = flood_fill_superpixels(frame, params.flood_tol);
  prior.re = edge_term(frame, plate, prior.superpixels, params.tauA, params.tauTheta);
  prior.r0 = Matte(frame.width(), frame.height());
  for (std::size_t i = 0; i < prior.r0.pixel_count(); ++i)
    prior.r0.values()[i] = prior.rc.values()[i] * prior.re.values()[i];
  return prior;
}

Vector background_agent_eval(std::span<const double> z,
                             std::span<const double> r0, double lambda2,
                             double gamma) {
  if (z.size() != r0.size())
    throw Error(ErrorCode::dimension_mismatch, "background agent: z vs r0 length");
  if (!(lambda2 >= 0.0))
    throw Error(ErrorCode::invalid_argument, "background agent: lambda2 must be >= 0");
  const double denom = 2.0 + 2.0 * lambda2 - 2.0 * gamma;
  if (!(denom > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "background agent: need gamma < 1 + lambda2");
  Vector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = (2.0 * r0[i] + 2.0 * lambda2 * z[i] - gamma) / denom;
  return out;
}

AgentOp make_background_agent(Vector r0, double lambda2, double gamma) {
  if (!(2.0 + 2.0 * lambda2 - 2.0 * gamma > 0.0) || !(lambda2 >= 0.0))
    throw Error(ErrorCode::invalid_argument,
                "background agent: need lambda2 >= 0 and gamma < 1 + lambda2");
  return AgentOp("background", [r0 = std::move(r0), lambda2,
                                gamma](std::span<const double> z) {
    return background_agent_eval(z, r0, lambda2, gamma);
  });
}

}  // namespace mace
