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

#include <span>
#include <vector>

#include "mace/consensus.hpp"

namespace mace {

struct TvWeights {
  double x = 1.0;
  double y = 1.0;
  double t = 0.0;
};

// T frames of H x W values, frame-major then raster order.
struct MatteVolume {
  int width = 0;
  int height = 0;
  int frames = 1;
  std::vector<double> values;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * height * frames;
  }
  void validate() const;
};

// sum over sites of sqrt(bx dx^2 + by dy^2 + bt dt^2), forward differences,
// zero across the border.
double tv_seminorm(const MatteVolume& v, const TvWeights& beta);

// ||a||_TV + lambda3 ||a - z||^2
double tv_objective(const MatteVolume& a, const MatteVolume& z,
                    const TvWeights& beta, double lambda3);

struct TvOptions {
  double lambda3 = 4.0;
  TvWeights beta;
  double inner_tol = 1e-5;
  int inner_max = 5000;
};

struct TvResult {
  MatteVolume solution;
  int iterations = 0;
  double relative_gap = 0.0;
};

// argmin_a ||a||_TV + lambda3 ||a - z||^2 by accelerated primal-dual
// iteration; stops once gap / max(|P|, site count) <= inner_tol, where P is
// the primal objective. Throws SolverError if that is not reached within
// inner_max iterations.
TvResult tv_prox(const MatteVolume& z, const TvOptions& options);

// Dual value <z, K^T p> - ||K^T p||^2 / (4 lambda3) for |p_i| <= 1.
// `dual` holds three components per site (x, y, t).
double tv_dual_value(const MatteVolume& z, std::span<const double> dual,
                     const TvWeights& beta, double lambda3);

AgentOp make_tv_agent(int width, int height, int frames, TvOptions options);

}  // namespace mace
