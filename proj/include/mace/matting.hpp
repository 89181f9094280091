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

#include <array>
#include <memory>
#include <vector>

#include "mace/consensus.hpp"
#include "mace/raster.hpp"
#include "mace/sparse.hpp"

namespace mace {

// Per-window statistics of the joint frame/plate color-line fit.
struct WindowStats {
  std::array<double, 3> mu{};     // sum_j I_j + eta sum_j P_j
  std::array<double, 9> sigma{};  // H^T H + eta G^T G + eps I, row-major
};

// Modified matting Laplacian for a frame/plate pair over 3x3 windows.
struct DualLayerLaplacian {
  SparseSymMatrix matrix;
  int width = 0;
  int height = 0;
  double eta = 0.03;
  double eps = 1e-7;
  std::vector<WindowStats> windows;  // one per interior window, raster order

  static constexpr int window_radius = 1;
};

struct LaplacianOptions {
  // Plate rows are down-weighted: plates carry noise and drift that break
  // the color-line fit for the foreground when trusted as much as the frame.
  double eta = 0.03;
  double eps = 1e-7;
};

// Dense 9x9 contribution of one 3x3 window. `frame` and `plate` hold the
// window's nine colors in raster order.
std::array<double, 81> dual_window_block(const std::array<std::array<double, 3>, 9>& frame,
                                         const std::array<std::array<double, 3>, 9>& plate,
                                         double eta, double eps,
                                         WindowStats* stats = nullptr);

// Assembles L~ from every fully interior 3x3 window. The plate matte is
// fixed at zero, so the result is positive definite.
DualLayerLaplacian build_dual_laplacian(const Image& frame, const Image& plate,
                                        const LaplacianOptions& options = {});

// d_i = 1 / (1 + exp(-kappa (z_i - theta))).
DiagMatrix confidence_from_input(std::span<const double> z, double kappa,
                                 double theta);

struct MattingParams {
  double lambda1 = 0.01;
  double kappa = 30.0;
  double theta = 0.8;
  CgOptions cg;
};

// argmin_a  a^T L~ a + lambda1 (a - z)^T D~ (a - z), with D~ built from z.
Vector matting_agent_eval(std::span<const double> z,
                          const DualLayerLaplacian& lap,
                          const MattingParams& params);

// Same minimisation with a caller-provided (frozen) confidence matrix.
Vector matting_solve(std::span<const double> z, const DualLayerLaplacian& lap,
                     const DiagMatrix& confidence, double lambda1,
                     const CgOptions& cg);

// Agent over `frames` stacked mattes, one Laplacian per frame.
AgentOp make_matting_agent(std::vector<std::shared_ptr<const DualLayerLaplacian>> laplacians,
                           MattingParams params);

}  // namespace mace
