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

#include "mace/tv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mace/error.hpp"

namespace mace {
namespace {

struct Grid {
  int w, h, t;
  std::size_t plane() const { return static_cast<std::size_t>(w) * h; }
  std::size_t size() const { return plane() * t; }
};

// dual = K x, three components per site.
void apply_k(const Grid& g, const TvWeights& b, std::span<const double> x,
             std::span<double> dual) {
  const double sx = std::sqrt(b.x), sy = std::sqrt(b.y), st = std::sqrt(b.t);
  std::size_t s = 0;
  for (int f = 0; f < g.t; ++f)
    for (int y = 0; y < g.h; ++y)
      for (int xx = 0; xx < g.w; ++xx, ++s) {
        const double v = x[s];
        dual[3 * s + 0] = xx + 1 < g.w ? sx * (x[s + 1] - v) : 0.0;
        dual[3 * s + 1] = y + 1 < g.h ? sy * (x[s + g.w] - v) : 0.0;
        dual[3 * s + 2] = f + 1 < g.t ? st * (x[s + g.plane()] - v) : 0.0;
      }
}

// out = K^T dual.
void apply_kt(const Grid& g, const TvWeights& b, std::span<const double> dual,
              std::span<double> out) {
  const double sx = std::sqrt(b.x), sy = std::sqrt(b.y), st = std::sqrt(b.t);
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t s = 0;
  for (int f = 0; f < g.t; ++f)
    for (int y = 0; y < g.h; ++y)
      for (int xx = 0; xx < g.w; ++xx, ++s) {
        if (xx + 1 < g.w) {
          const double p = sx * dual[3 * s + 0];
          out[s + 1] += p;
          out[s] -= p;
        }
        if (y + 1 < g.h) {
          const double p = sy * dual[3 * s + 1];
          out[s + g.w] += p;
          out[s] -= p;
        }
        if (f + 1 < g.t) {
          const double p = st * dual[3 * s + 2];
          out[s + g.plane()] += p;
          out[s] -= p;
        }
      }
}

double seminorm(const Grid& g, const TvWeights& b, std::span<const double> x,
                std::vector<double>& scratch) {
  scratch.resize(3 * g.size());
  apply_k(g, b, x, scratch);
  double total = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s)
    total += std::sqrt(scratch[3 * s] * scratch[3 * s] +
                       scratch[3 * s + 1] * scratch[3 * s + 1] +
                       scratch[3 * s + 2] * scratch[3 * s + 2]);
  return total;
}

double fidelity(std::span<const double> a, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - z[i]) * (a[i] - z[i]);
  return s;
}

void validate_weights(const TvWeights& b) {
  if (!(b.x >= 0.0) || !(b.y >= 0.0) || !(b.t >= 0.0))
    throw Error(ErrorCode::invalid_argument, "TV weights must be nonnegative");
}

double dual_value(const Grid& g, const TvWeights& b, std::span<const double> z,
                  std::span<const double> p, double lambda, std::vector<double>& ktp) {
  ktp.resize(g.size());
  apply_kt(g, b, p, ktp);
  double cross = 0.0, ktp2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cross += z[i] * ktp[i];
    ktp2 += ktp[i] * ktp[i];
  }
  return cross - ktp2 / (4.0 * lambda);
}

// Accelerated primal-dual iteration for one grid (primal modulus 2*lambda).
// The gap certificate also tracks averages weighted by 1/tau^2; any convex
// combination of feasible duals is feasible, so the bound stays valid.
// The gap is normalized by max(|P|, site count): below one it bounds the
// mean per-site suboptimality.
TvResult solve(const Grid& g, std::span<const double> z, const TvOptions& opt) {
  constexpr int kGapEvery = 10;
  const std::size_t n = g.size();
  const double lambda = opt.lambda3;
  TvResult res;
  res.solution.values.assign(z.begin(), z.end());

  const double k_norm = std::sqrt(4.0 * (opt.beta.x + opt.beta.y +
                                         (g.t > 1 ? opt.beta.t : 0.0)));
  std::vector<double> scratch, ktp_scratch;
  const double z_objective = seminorm(g, opt.beta, z, scratch);
  if (k_norm == 0.0 || z_objective == 0.0) return res;

  std::vector<double> x(z.begin(), z.end()), x_bar = x, x_prev(n), x_avg = x;
  std::vector<double> p(3 * n, 0.0), p_avg = p, kx(3 * n), ktp(n, 0.0);
  double tau = 1.0 / k_norm, sigma = 1.0 / k_norm, weight_sum = 0.0;
  const double mu = 2.0 * lambda;
  const auto primal = [&](std::span<const double> v) {
    return seminorm(g, opt.beta, v, scratch) + lambda * fidelity(v, z);
  };

  double best_primal = z_objective;
  const std::vector<double>* best = nullptr;
  res.relative_gap = 1.0;
  for (int it = 1; it <= opt.inner_max; ++it) {
    apply_k(g, opt.beta, x_bar, kx);
    for (std::size_t s = 0; s < n; ++s) {
      const double q0 = p[3 * s] + sigma * kx[3 * s];
      const double q1 = p[3 * s + 1] + sigma * kx[3 * s + 1];
      const double q2 = p[3 * s + 2] + sigma * kx[3 * s + 2];
      const double mag = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2);
      const double scale = mag > 1.0 ? 1.0 / mag : 1.0;
      p[3 * s] = q0 * scale;
      p[3 * s + 1] = q1 * scale;
      p[3 * s + 2] = q2 * scale;
    }
    apply_kt(g, opt.beta, p, ktp);
    x_prev = x;
    const double damp = 1.0 / (1.0 + 2.0 * tau * lambda);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = (x[i] - tau * ktp[i] + 2.0 * tau * lambda * z[i]) * damp;

    const double w = 1.0 / (tau * tau);
    weight_sum += w;
    const double mix = w / weight_sum;
    for (std::size_t i = 0; i < n; ++i) x_avg[i] += mix * (x[i] - x_avg[i]);
    for (std::size_t i = 0; i < 3 * n; ++i) p_avg[i] += mix * (p[i] - p_avg[i]);

    const double theta = 1.0 / std::sqrt(1.0 + 2.0 * mu * tau);
    tau *= theta;
    sigma /= theta;
    for (std::size_t i = 0; i < n; ++i) x_bar[i] = x[i] + theta * (x[i] - x_prev[i]);

    res.iterations = it;
    if (it % kGapEvery != 0 && it != opt.inner_max) continue;
    const double px = primal(x), pa = primal(x_avg);
    const double upper = std::min(px, pa);
    const double lower = std::max(dual_value(g, opt.beta, z, p, lambda, ktp_scratch),
                                  dual_value(g, opt.beta, z, p_avg, lambda, ktp_scratch));
    res.relative_gap = (upper - lower) / std::max(std::abs(upper), static_cast<double>(n));
    if (res.relative_gap <= opt.inner_tol) {
      if (upper < best_primal) {
        best_primal = upper;
        best = px <= pa ? &x : &x_avg;
      }
      break;
    }
  }
  if (res.relative_gap > opt.inner_tol) {
    std::ostringstream msg;
    msg << "tv_prox: relative duality gap " << res.relative_gap << " after "
        << opt.inner_max << " iterations";
    throw SolverError(ErrorCode::not_converged, msg.str(), res.relative_gap,
                      opt.inner_max);
  }
  // z itself is a candidate; keep whichever has the lower objective.
  if (best) res.solution.values = *best;
  return res;
}

}  // namespace

void MatteVolume::validate() const {
  if (width < 1 || height < 1 || frames < 1)
    throw Error(ErrorCode::invalid_argument, "matte volume must be non-empty");
  if (values.size() != size())
    throw Error(ErrorCode::dimension_mismatch,
                "matte volume holds " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(size()));
}

double tv_seminorm(const MatteVolume& v, const TvWeights& beta) {
  v.validate();
  validate_weights(beta);
  std::vector<double> scratch;
  return seminorm(Grid{v.width, v.height, v.frames}, beta, v.values, scratch);
}

double tv_objective(const MatteVolume& a, const MatteVolume& z,
                    const TvWeights& beta, double lambda3) {
  if (a.size() != z.size())
    throw Error(ErrorCode::dimension_mismatch, "tv_objective: volume sizes differ");
  return tv_seminorm(a, beta) + lambda3 * fidelity(a.values, z.values);
}

double tv_dual_value(const MatteVolume& z, std::span<const double> dual,
                     const TvWeights& beta, double lambda3) {
  z.validate();
  if (dual.size() != 3 * z.size())
    throw Error(ErrorCode::dimension_mismatch, "tv_dual_value: dual size");
  const Grid g{z.width, z.height, z.frames};
  std::vector<double> ktp;
  return dual_value(g, beta, z.values, dual, lambda3, ktp);
}

TvResult tv_prox(const MatteVolume& z, const TvOptions& options) {
  z.validate();
  validate_weights(options.beta);
  if (!(options.lambda3 > 0.0))
    throw Error(ErrorCode::invalid_argument, "tv_prox: lambda3 must be > 0");
  if (!(options.inner_tol > 0.0) || options.inner_max < 1)
    throw Error(ErrorCode::invalid_argument, "tv_prox: bad inner tolerance or budget");
  for (double v : z.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::numeric, "tv_prox: non-finite input");

  if (options.beta.t > 0.0 || z.frames == 1) {
    TvResult r = solve(Grid{z.width, z.height, z.frames}, z.values, options);
    r.solution.width = z.width;
    r.solution.height = z.height;
    r.solution.frames = z.frames;
    return r;
  }

  // No temporal coupling: frames are independent problems.
  TvResult out;
  out.solution = MatteVolume{z.width, z.height, z.frames, {}};
  out.solution.values.reserve(z.size());
  const std::size_t plane = static_cast<std::size_t>(z.width) * z.height;
  for (int f = 0; f < z.frames; ++f) {
    const auto part = std::span<const double>(z.values).subspan(f * plane, plane);
    TvResult r = solve(Grid{z.width, z.height, 1}, part, options);
    out.iterations = std::max(out.iterations, r.iterations);
    out.relative_gap = std::max(out.relative_gap, r.relative_gap);
    out.solution.values.insert(out.solution.values.end(), r.solution.values.begin(),
                               r.solution.values.end());
  }
  return out;
}

AgentOp make_tv_agent(int width, int height, int frames, TvOptions options) {
  return AgentOp("tv", [width, height, frames, options](std::span<const double> z) {
    MatteVolume v{width, height, frames, Vector(z.begin(), z.end())};
    return tv_prox(v, options).solution.values;
  });
}

}  // namespace mace
