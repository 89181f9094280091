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

// Independent reference computations shared by the unit and acceptance
// suites. Nothing here calls the library routine it is meant to check.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mace/raster.hpp"
#include "mace/sparse.hpp"

namespace oracle {

inline mace::Image random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mace::Image img(w, h);
  for (double& v : img.values()) v = u(rng);
  return img;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng,
                                         double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Eigen::MatrixXd dense(const mace::SparseSymMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.dimension());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) m(i, static_cast<Eigen::Index>(cols[k])) += vals[k];
  return m;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// min over (a, b) of
//   sum_j (alpha_j - a.I_j - b)^2 + eta sum_j (a.P_j + b)^2 + eps |a|^2
// for the 3x3 window with top-left corner (x0, y0), by QR on the stacked
// 21x4 system.
inline double window_residual(const mace::Image& frame, const mace::Image& plate,
                              std::span<const double> alpha, int x0, int y0, double eta,
                              double eps) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(21, 4);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(21);
  const double se = std::sqrt(eta);
  int row = 0;
  for (int dy = 0; dy < 3; ++dy)
    for (int dx = 0; dx < 3; ++dx, ++row) {
      const int x = x0 + dx, yy = y0 + dy;
      for (int c = 0; c < 3; ++c) {
        a(row, c) = frame(x, yy, c);
        a(9 + row, c) = se * plate(x, yy, c);
      }
      a(row, 3) = 1.0;
      a(9 + row, 3) = se;
      y(row) = alpha[frame.index(x, yy)];
    }
  for (int c = 0; c < 3; ++c) a(18 + c, c) = std::sqrt(eps);
  const Eigen::VectorXd s = a.colPivHouseholderQr().solve(y);
  return (a * s - y).squaredNorm();
}

inline double laplacian_energy(const mace::Image& frame, const mace::Image& plate,
                               std::span<const double> alpha, double eta, double eps) {
  double total = 0.0;
  for (int y0 = 0; y0 + 3 <= frame.height(); ++y0)
    for (int x0 = 0; x0 + 3 <= frame.width(); ++x0)
      total += window_residual(frame, plate, alpha, x0, y0, eta, eps);
  return total;
}

// Golden-section search for the minimiser of a unimodal f on [lo, hi].
inline double golden_section(const std::function<long double(long double)>& f, long double lo,
                             long double hi) {
  const long double g = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  long double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && hi - lo > 1e-16L; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  return static_cast<double>((lo + hi) / 2.0L);
}

// Forward-difference gradient of a T x H x W volume, zero across the border,
// scaled by sqrt(beta). Three components per site.
struct TvGrid {
  int w, h, t;
  double bx, by, bt;

  std::size_t sites() const { return static_cast<std::size_t>(w) * h * t; }
  std::size_t at(int x, int y, int f) const {
    return (static_cast<std::size_t>(f) * h + y) * w + x;
  }

  std::vector<double> grad(std::span<const double> a) const {
    std::vector<double> g(3 * sites(), 0.0);
    for (int f = 0; f < t; ++f)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t i = at(x, y, f);
          if (x + 1 < w) g[3 * i] = std::sqrt(bx) * (a[at(x + 1, y, f)] - a[i]);
          if (y + 1 < h) g[3 * i + 1] = std::sqrt(by) * (a[at(x, y + 1, f)] - a[i]);
          if (f + 1 < t) g[3 * i + 2] = std::sqrt(bt) * (a[at(x, y, f + 1)] - a[i]);
        }
    return g;
  }

  // Adjoint of grad.
  std::vector<double> grad_t(std::span<const double> p) const {
    std::vector<double> out(sites(), 0.0);
    for (int f = 0; f < t; ++f)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t i = at(x, y, f);
          if (x + 1 < w) {
            out[at(x + 1, y, f)] += std::sqrt(bx) * p[3 * i];
            out[i] -= std::sqrt(bx) * p[3 * i];
          }
          if (y + 1 < h) {
            out[at(x, y + 1, f)] += std::sqrt(by) * p[3 * i + 1];
            out[i] -= std::sqrt(by) * p[3 * i + 1];
          }
          if (f + 1 < t) {
            out[at(x, y, f + 1)] += std::sqrt(bt) * p[3 * i + 2];
            out[i] -= std::sqrt(bt) * p[3 * i + 2];
          }
        }
    return out;
  }

  double tv(std::span<const double> a) const {
    const auto g = grad(a);
    double s = 0.0;
    for (std::size_t i = 0; i < sites(); ++i)
      s += std::sqrt(g[3 * i] * g[3 * i] + g[3 * i + 1] * g[3 * i + 1] +
                     g[3 * i + 2] * g[3 * i + 2]);
    return s;
  }

  double objective(std::span<const double> a, std::span<const double> z, double lambda) const {
    double fid = 0.0;
    for (std::size_t i = 0; i < sites(); ++i) fid += (a[i] - z[i]) * (a[i] - z[i]);
    return tv(a) + lambda * fid;
  }
};

struct TvReference {
  std::vector<double> solution;
  double primal = 0.0;  // objective at solution
  double dual = 0.0;    // certified lower bound on the optimum
};

// FISTA on the dual max_{|p_i| <= 1} <K^T p, z> - |K^T p|^2 / (4 lambda),
// primal recovered as z - K^T p / (2 lambda).
inline TvReference tv_dual_reference(const TvGrid& g, std::span<const double> z, double lambda,
                                     int steps) {
  const std::size_t n = g.sites();
  const double lip = 4.0 * (g.bx + g.by + g.bt) / (2.0 * lambda);
  std::vector<double> p(3 * n, 0.0), q = p, prev = p;
  double tk = 1.0;
  const auto primal_of = [&](std::span<const double> dual) {
    auto kt = g.grad_t(dual);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = z[i] - kt[i] / (2.0 * lambda);
    return a;
  };
  for (int s = 0; s < steps; ++s) {
    const auto a = primal_of(q);
    const auto grad = g.grad(a);
    prev = p;
    for (std::size_t i = 0; i < n; ++i) {
      double v[3];
      double nrm = 0.0;
      for (int c = 0; c < 3; ++c) {
        v[c] = q[3 * i + c] + grad[3 * i + c] / lip;
        nrm += v[c] * v[c];
      }
      nrm = std::max(1.0, std::sqrt(nrm));
      for (int c = 0; c < 3; ++c) p[3 * i + c] = v[c] / nrm;
    }
    const double tn = (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
    for (std::size_t k = 0; k < p.size(); ++k) q[k] = p[k] + (tk - 1.0) / tn * (p[k] - prev[k]);
    tk = tn;
  }
  TvReference ref;
  ref.solution = primal_of(p);
  ref.primal = g.objective(ref.solution, z, lambda);
  const auto kt = g.grad_t(p);
  double lin = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += kt[i] * z[i];
    sq += kt[i] * kt[i];
  }
  ref.dual = lin - sq / (4.0 * lambda);
  return ref;
}

// Best objective seen by subgradient descent with steps c / sqrt(k + 1).
inline double tv_subgradient_best(const TvGrid& g, std::span<const double> z, double lambda,
                                  int steps, double c = 0.05) {
  const std::size_t n = g.sites();
  std::vector<double> a(z.begin(), z.end());
  double best = g.objective(a, z, lambda);
  for (int k = 0; k < steps; ++k) {
    const auto grad = g.grad(a);
    std::vector<double> unit(3 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double nrm = std::sqrt(grad[3 * i] * grad[3 * i] + grad[3 * i + 1] * grad[3 * i + 1] +
                                   grad[3 * i + 2] * grad[3 * i + 2]);
      if (nrm > 0.0)
        for (int cc = 0; cc < 3; ++cc) unit[3 * i + cc] = grad[3 * i + cc] / nrm;
    }
    const auto sub = g.grad_t(unit);
    const double step = c / std::sqrt(static_cast<double>(k) + 1.0);
    for (std::size_t i = 0; i < n; ++i) a[i] -= step * (sub[i] + 2.0 * lambda * (a[i] - z[i]));
    best = std::min(best, g.objective(a, z, lambda));
  }
  return best;
}

}  // namespace oracle
