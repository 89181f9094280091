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

#include <vector>

#include "mace/consensus.hpp"
#include "mace/raster.hpp"

namespace mace {

// Superpixel id per pixel, dense from 0.
struct LabelRaster {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> labels;

  int operator()(int x, int y) const noexcept {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

// Two-tap forward differences of frame and plate and the derived maps.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> theta;  // ||grad I - grad P||
  std::vector<double> amp;    // max(||grad I||, ||grad P||)
};

struct BackgroundParams {
  double hs = 5.0;
  double hr = 5.0;
  int radius = 2;
  double intensity_scale = 255.0;  // color units of hr and sigma_delta
  double sigma_delta = 10.0;
  double flood_tol = 0.05;
  double tauA = 0.01;
  double tauTheta = 0.02;
};

struct BackgroundPrior {
  Matte r0;
  Matte rc;
  Matte re;
  Matte delta;
  LabelRaster superpixels;
  BackgroundParams params;
};

// Delta_i = sum_{j in Omega_i} w_ij ||I_j - P_j||^2 with normalised
// bilateral weights over a (2 radius + 1)^2 window clipped to the image.
// Colors are multiplied by `intensity_scale` first.
Matte bilateral_color_distance(const Image& frame, const Image& plate,
                               double hs, double hr, int radius,
                               double intensity_scale = 1.0);

// Normalised bilateral weights of pixel (x, y), in window raster order.
std::vector<double> bilateral_weights(const Image& frame, int x, int y,
                                      double hs, double hr, int radius,
                                      double intensity_scale = 1.0);

// r_c = 1 - exp(-Delta^2 / (2 sigma_delta^2)).
Matte color_term(const Matte& delta, double sigma_delta);

// 4-connected flood fill against the region seed color.
LabelRaster flood_fill_superpixels(const Image& image, double color_tol);

GradientField gradient_field(const Image& frame, const Image& plate);

// Fraction of strong-amplitude pixels in each superpixel whose gradient
// differs from the plate; 0 for superpixels without strong pixels.
Matte edge_term(const Image& frame, const Image& plate,
                const LabelRaster& labels, double tauA, double tauTheta);

// r0 = r_c * r_e with every intermediate kept.
BackgroundPrior build_background_prior(const Image& frame, const Image& plate,
                                       const BackgroundParams& params = {});

// Closed-form minimiser of ||a - r0||^2 + lambda2 ||a - z||^2 + gamma a(1-a).
Vector background_agent_eval(std::span<const double> z,
                             std::span<const double> r0, double lambda2,
                             double gamma);

AgentOp make_background_agent(Vector r0, double lambda2, double gamma);

}  // namespace mace
