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

#include <cstdint>
#include <string>
#include <vector>

#include "mace/raster.hpp"

namespace mace {

enum class ShapeKind { square, disk };

struct SceneSpec {
  int width = 64;
  int height = 64;
  int frames = 1;
  ShapeKind shape = ShapeKind::square;
  int shape_size = 24;       // side or diameter in pixels
  double motion_x = 0.0;     // pixels per frame
  double motion_y = 0.0;
  double fg_r = 0.85, fg_g = 0.25, fg_b = 0.2;
  double fg_texture = 0.04;  // amplitude of foreground shading
  double bg_contrast = 0.6;  // relative amplitude of the plate texture
  double color_similarity = 0.0;  // blend of fg toward local background, [0,1]
  double brightness_drift = 0.0;  // added to the plate
  double noise_sigma = 0.0;       // Gaussian noise on the plate
  int jitter_px = 0;              // max integer background shift per frame
};

struct SyntheticSequence {
  Image plate;
  std::vector<Image> frames;
  std::vector<Matte> truth;
  // Background offset applied to frame t (frame bg = clean bg shifted).
  std::vector<std::pair<int, int>> jitter;
  Image clean_background;
};

SyntheticSequence synth_generate(const SceneSpec& spec, std::uint64_t seed);

// result(x, y) = image(x - dx, y - dy), replicate at the border.
Image shift_image(const Image& image, int dx, int dy);

}  // namespace mace
