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

#include "mace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mace {
namespace {

// Unit color direction of the additive foreground texture.
constexpr double kFgTextureAxis[3] = {0.70710678118654752, -0.70710678118654752, 0.0};

struct Wave {
  double fx, fy, phase, amp;
};

bool inside(const SceneSpec& s, double cx, double cy, int x, int y) {
  const double px = x + 0.5, py = y + 0.5;
  const double half = s.shape_size / 2.0;
  if (s.shape == ShapeKind::square)
    return std::abs(px - cx) < half && std::abs(py - cy) < half;
  return (px - cx) * (px - cx) + (py - cy) * (py - cy) < half * half;
}

}  // namespace

Image shift_image(const Image& image, int dx, int dy) {
  Image out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, image.width() - 1);
      const int sy = std::clamp(y - dy, 0, image.height() - 1);
      for (int c = 0; c < 3; ++c) out(x, y, c) = image(sx, sy, c);
    }
  return out;
}

SyntheticSequence synth_generate(const SceneSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int w = spec.width, h = spec.height;

  // Background: two scalar fields over a fixed base color, one shading the
  // base and one along a chroma axis, so plate colors lie on a plane.
  SyntheticSequence seq;
  seq.clean_background = Image(w, h);
  const double base[3] = {0.45, 0.5, 0.42};
  const double chroma[3] = {0.40824829046386302, -0.81649658092772603, 0.40824829046386302};
  const auto make_field = [&]() {
    std::vector<Wave> waves;
    for (int k = 0; k < 3; ++k) {
      const double angle = unit(rng) * std::numbers::pi;
      const double freq = 0.15 + 0.35 * unit(rng);
      waves.push_back({freq * std::cos(angle), freq * std::sin(angle),
                       unit(rng) * 2.0 * std::numbers::pi, 0.25 + 0.75 * unit(rng)});
    }
    return waves;
  };
  const auto eval = [](const std::vector<Wave>& waves, int x, int y) {
    double v = 0.0, amp = 0.0;
    for (const auto& wv : waves) {
      v += wv.amp * std::sin(wv.fx * x + wv.fy * y + wv.phase);
      amp += wv.amp;
    }
    return v / amp;
  };
  const auto shading = make_field();
  const auto tint = make_field();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s1 = spec.bg_contrast * eval(shading, x, y);
      const double s2 = 0.5 * spec.bg_contrast * eval(tint, x, y);
      for (int c = 0; c < 3; ++c)
        seq.clean_background(x, y, c) =
            std::clamp(base[c] * (1.0 + s1) + s2 * chroma[c], 0.0, 1.0);
    }

  seq.plate = Image(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = seq.clean_background(x, y, c) + spec.brightness_drift;
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * gauss(rng);
        seq.plate(x, y, c) = std::clamp(v, 0.0, 1.0);
      }

  const double fg[3] = {spec.fg_r, spec.fg_g, spec.fg_b};
  const double shade_phase = unit(rng) * 2.0 * std::numbers::pi;
  for (int t = 0; t < spec.frames; ++t) {
    int jx = 0, jy = 0;
    if (spec.jitter_px > 0) {
      std::uniform_int_distribution<int> jit(-spec.jitter_px, spec.jitter_px);
      do {
        jx = jit(rng);
        jy = jit(rng);
      } while (jx == 0 && jy == 0);
    }
    seq.jitter.emplace_back(jx, jy);
    Image frame = shift_image(seq.clean_background, jx, jy);
    Matte truth(w, h);
    const double cx = w / 2.0 + spec.motion_x * t;
    const double cy = h / 2.0 + spec.motion_y * t;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!inside(spec, cx, cy, x, y)) continue;
        truth(x, y) = 1.0;
        const double shade =
            spec.fg_texture * std::sin(0.45 * (x - cx) + 0.3 * (y - cy) + shade_phase);
        for (int c = 0; c < 3; ++c) {
          const double own = fg[c] + shade * kFgTextureAxis[c];
          const double mixed = (1.0 - spec.color_similarity) * own +
                               spec.color_similarity * seq.clean_background(x, y, c);
          frame(x, y, c) = std::clamp(mixed, 0.0, 1.0);
        }
      }
    seq.frames.push_back(std::move(frame));
    seq.truth.push_back(std::move(truth));
  }
  return seq;
}

}  // namespace mace
