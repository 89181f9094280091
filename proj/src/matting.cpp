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

#include "mace/matting.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "mace/error.hpp"

namespace mace {
namespace {

constexpr int kWindow = 3;
constexpr int kWindowPixels = kWindow * kWindow;
constexpr int kStencil = 5;  // pixels sharing a 3x3 window lie within +-2
constexpr int kStencilSize = kStencil * kStencil;

void require_finite(const Image& img, const char* what) {
  for (double v : img.values())
    if (!std::isfinite(v))
      throw Error(ErrorCode::numeric, std::string(what) + " has a non-finite pixel");
}

}  // namespace

std::array<double, 81> dual_window_block(
    const std::array<std::array<double, 3>, 9>& frame,
    const std::array<std::array<double, 3>, 9>& plate, double eta, double eps,
    WindowStats* stats) {
  Eigen::Matrix3d sigma = eps * Eigen::Matrix3d::Identity();
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  for (int j = 0; j < kWindowPixels; ++j) {
    const Eigen::Vector3d i_j(frame[j][0], frame[j][1], frame[j][2]);
    const Eigen::Vector3d p_j(plate[j][0], plate[j][1], plate[j][2]);
    sigma += i_j * i_j.transpose() + eta * p_j * p_j.transpose();
    mu += i_j + eta * p_j;
  }
  if (stats) {
    for (int r = 0; r < 3; ++r) {
      stats->mu[r] = mu(r);
      for (int c = 0; c < 3; ++c) stats->sigma[r * 3 + c] = sigma(r, c);
    }
  }

  // Eliminating (a, b) from the stacked least squares leaves the Schur
  // complement T = Sigma - mu mu^T / c.
  const double c = kWindowPixels * (1.0 + eta);
  const Eigen::Matrix3d t = sigma - mu * mu.transpose() / c;
  const Eigen::Vector3d mu_hat = mu / c;
  const Eigen::Matrix3d t_inv = t.ldlt().solve(Eigen::Matrix3d::Identity());

  std::array<Eigen::Vector3d, kWindowPixels> centered;
  for (int j = 0; j < kWindowPixels; ++j)
    centered[j] = Eigen::Vector3d(frame[j][0], frame[j][1], frame[j][2]) - mu_hat;

  std::array<double, 81> block{};
  for (int i = 0; i < kWindowPixels; ++i) {
    const Eigen::Vector3d ti = t_inv * centered[i];
    for (int j = i; j < kWindowPixels; ++j) {
      const double v = (i == j ? 1.0 : 0.0) - (1.0 / c + ti.dot(centered[j]));
      block[i * kWindowPixels + j] = v;
      block[j * kWindowPixels + i] = v;
    }
  }
  return block;
}

DualLayerLaplacian build_dual_laplacian(const Image& frame, const Image& plate,
                                        const LaplacianOptions& options) {
  require_same_size(frame, plate, "build_dual_laplacian: frame vs plate");
  const int w = frame.width(), h = frame.height();
  if (w < kWindow || h < kWindow)
    throw Error(ErrorCode::invalid_argument,
                "build_dual_laplacian: image " + size_string(w, h) +
                    " is smaller than the 3x3 window");
  if (!(options.eta > 0.0) || !(options.eps >= 0.0))
    throw Error(ErrorCode::invalid_argument,
                "build_dual_laplacian: need eta > 0 and eps >= 0");
  require_finite(frame, "frame");
  require_finite(plate, "plate");

  const std::size_t n = frame.pixel_count();
  std::vector<double> acc(n * kStencilSize, 0.0);
  std::vector<unsigned char> touched(n * kStencilSize, 0);

  DualLayerLaplacian lap;
  lap.width = w;
  lap.height = h;
  lap.eta = options.eta;
  lap.eps = options.eps;
  lap.windows.reserve(static_cast<std::size_t>(w - 2) * (h - 2));

  std::array<std::array<double, 3>, 9> fi{}, pi{};
  std::array<std::size_t, 9> idx{};
  for (int cy = 1; cy + 1 < h; ++cy)
    for (int cx = 1; cx + 1 < w; ++cx) {
      int k = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx, ++k) {
          const int x = cx + dx, y = cy + dy;
          idx[k] = frame.index(x, y);
          for (int ch = 0; ch < 3; ++ch) {
            fi[k][ch] = frame(x, y, ch);
            pi[k][ch] = plate(x, y, ch);
          }
        }
      WindowStats stats;
      const auto block = dual_window_block(fi, pi, options.eta, options.eps, &stats);
      lap.windows.push_back(stats);
      for (int a = 0; a < kWindowPixels; ++a) {
        const int ax = cx + a % 3 - 1, ay = cy + a / 3 - 1;
        for (int b = 0; b < kWindowPixels; ++b) {
          const int bx = cx + b % 3 - 1, by = cy + b / 3 - 1;
          const int slot = (by - ay + 2) * kStencil + (bx - ax + 2);
          acc[idx[a] * kStencilSize + slot] += block[a * kWindowPixels + b];
          touched[idx[a] * kStencilSize + slot] = 1;
        }
      }
    }

  std::vector<std::size_t> row_ptr(n + 1, 0), cols;
  std::vector<double> values;
  cols.reserve(n * kStencilSize);
  values.reserve(n * kStencilSize);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t row = frame.index(x, y);
      // Slots in raster order give ascending column indices.
      for (int s = 0; s < kStencilSize; ++s) {
        if (!touched[row * kStencilSize + s]) continue;
        const int nx = x + s % kStencil - 2, ny = y + s / kStencil - 2;
        cols.push_back(frame.index(nx, ny));
        values.push_back(acc[row * kStencilSize + s]);
      }
      row_ptr[row + 1] = cols.size();
    }
  lap.matrix = SparseSymMatrix(n, std::move(row_ptr), std::move(cols), std::move(values));
  return lap;
}

DiagMatrix confidence_from_input(std::span<const double> z, double kappa,
                                 double theta) {
  if (!(kappa > 0.0))
    throw Error(ErrorCode::invalid_argument, "confidence: kappa must be > 0");
  if (!(theta > 0.0 && theta < 1.0))
    throw Error(ErrorCode::invalid_argument, "confidence: theta must lie in (0,1)");
  std::vector<double> d(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    d[i] = 1.0 / (1.0 + std::exp(-kappa * (z[i] - theta)));
  return DiagMatrix(std::move(d));
}

Vector matting_solve(std::span<const double> z, const DualLayerLaplacian& lap,
                     const DiagMatrix& confidence, double lambda1,
                     const CgOptions& cg) {
  const std::size_t n = lap.matrix.dimension();
  if (z.size() != n || confidence.dimension() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "matting: input of length " + std::to_string(z.size()) +
                    " for a Laplacian of size " + std::to_string(n));
  if (!(lambda1 > 0.0))
    throw Error(ErrorCode::invalid_argument, "matting: lambda1 must be > 0");
  std::vector<double> shift(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(z[i]))
      throw Error(ErrorCode::numeric, "matting: non-finite input");
    shift[i] = lambda1 * confidence[i];
    rhs[i] = shift[i] * z[i];
  }
  return cg_solve(lap.matrix, DiagMatrix(std::move(shift)), rhs, cg, z).x;
}

Vector matting_agent_eval(std::span<const double> z,
                          const DualLayerLaplacian& lap,
                          const MattingParams& params) {
  return matting_solve(z, lap, confidence_from_input(z, params.kappa, params.theta),
                       params.lambda1, params.cg);
}

AgentOp make_matting_agent(
    std::vector<std::shared_ptr<const DualLayerLaplacian>> laplacians,
    MattingParams params) {
  if (laplacians.empty())
    throw Error(ErrorCode::invalid_argument, "matting agent needs a Laplacian");
  return AgentOp("matting", [laps = std::move(laplacians),
                             params](std::span<const double> z) {
    Vector out;
    out.reserve(z.size());
    std::size_t offset = 0;
    for (const auto& lap : laps) {
      const std::size_t n = lap->matrix.dimension();
      if (offset + n > z.size())
        throw Error(ErrorCode::dimension_mismatch, "matting agent: input too short");
      const Vector part = matting_agent_eval(z.subspan(offset, n), *lap, params);
      out.insert(out.end(), part.begin(), part.end());
      offset += n;
    }
    if (offset != z.size())
      throw Error(ErrorCode::dimension_mismatch, "matting agent: input too long");
    return out;
  });
}

}  // namespace mace
