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

#include "mace/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "mace/error.hpp"

namespace mace {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SparseSymMatrix::SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> cols,
                                 std::vector<double> values)
    : n_(n),
      row_ptr_(std::move(row_ptr)),
      cols_(std::move(cols)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != cols_.size() || cols_.size() != values_.size())
    throw Error(ErrorCode::invalid_argument, "malformed CSR arrays");
  for (std::size_t i = 0; i < n_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1])
      throw Error(ErrorCode::invalid_argument, "CSR row pointers decrease");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (cols_[k] >= n_)
        throw Error(ErrorCode::invalid_argument, "CSR column out of range");
      if (k > row_ptr_[i] && cols_[k] <= cols_[k - 1])
        throw Error(ErrorCode::invalid_argument,
                    "CSR columns unsorted or duplicated in row " + std::to_string(i));
    }
  }
}

SparseSymMatrix SparseSymMatrix::identity(std::size_t n) {
  return diagonal(std::vector<double>(n, 1.0));
}

SparseSymMatrix SparseSymMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> rp(n + 1), cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    rp[i + 1] = i + 1;
    cols[i] = i;
  }
  return SparseSymMatrix(n, std::move(rp), std::move(cols),
                         std::vector<double>(d.begin(), d.end()));
}

double SparseSymMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) return 0.0;
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<double> SparseSymMatrix::diagonal_entries() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

void SparseSymMatrix::multiply(std::span<const double> x,
                               std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_)
    throw Error(ErrorCode::dimension_mismatch, "matrix-vector size mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseSymMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseSymMatrix::quadratic_form(std::span<const double> x) const {
  return dot(x, multiply(x));
}

double SparseSymMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(cols_[k], i)));
  return worst;
}

DiagMatrix::DiagMatrix(std::vector<double> entries) : d_(std::move(entries)) {
  for (double v : d_)
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorCode::invalid_argument,
                  "diagonal entries must be finite and nonnegative");
}

SparseSymMatrix assemble_from_window_blocks(std::size_t n,
                                            std::span<const WindowBlock> blocks) {
  struct Triplet {
    std::size_t row, col;
    double value;
  };
  std::vector<Triplet> triplets;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.indices.size() * b.indices.size();
  triplets.reserve(total);

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    const std::size_t m = b.indices.size();
    if (b.block.size() != m * m)
      throw Error(ErrorCode::invalid_argument,
                  "block " + std::to_string(bi) + " has " +
                      std::to_string(b.block.size()) + " values for " +
                      std::to_string(m) + " indices");
    for (std::size_t idx : b.indices)
      if (idx >= n)
        throw Error(ErrorCode::invalid_argument,
                    "block " + std::to_string(bi) + " index " +
                        std::to_string(idx) + " out of range [0, " +
                        std::to_string(n) + ")");
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) {
        if (std::abs(b.block[r * m + c] - b.block[c * m + r]) >
            1e-12 * (1.0 + std::abs(b.block[r * m + c])))
          throw Error(ErrorCode::invalid_argument,
                      "block " + std::to_string(bi) + " is not symmetric");
        triplets.push_back({b.indices[r], b.indices[c], b.block[r * m + c]});
      }
  }

  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> values;
  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t row = triplets[k].row, col = triplets[k].col;
    // Summed in sorted order so that block order cannot change the result.
    double sum = 0.0;
    std::vector<double> parts;
    for (; k < triplets.size() && triplets[k].row == row && triplets[k].col == col; ++k)
      parts.push_back(triplets[k].value);
    std::sort(parts.begin(), parts.end());
    for (double p : parts) sum += p;
    cols.push_back(col);
    values.push_back(sum);
    ++row_ptr[row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseSymMatrix(n, std::move(row_ptr), std::move(cols), std::move(values));
}

CgResult cg_solve(const SparseSymMatrix& a, const DiagMatrix& shift,
                  std::span<const double> b, const CgOptions& options,
                  std::span<const double> initial_guess) {
  const std::size_t n = a.dimension();
  if (shift.dimension() != n || b.size() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "cg_solve: system of size " + std::to_string(n) +
                    " given shift " + std::to_string(shift.dimension()) +
                    " and rhs " + std::to_string(b.size()));
  if (!initial_guess.empty() && initial_guess.size() != n)
    throw Error(ErrorCode::dimension_mismatch, "cg_solve: initial guess size");
  if (!(options.tol > 0.0))
    throw Error(ErrorCode::invalid_argument, "cg_solve: tol must be > 0");

  CgResult result;
  result.x.assign(n, 0.0);
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) return result;
  if (!initial_guess.empty())
    std::copy(initial_guess.begin(), initial_guess.end(), result.x.begin());

  auto apply = [&](std::span<const double> x, std::span<double> y) {
    a.multiply(x, y);
    for (std::size_t i = 0; i < n; ++i) y[i] += shift[i] * x[i];
  };

  std::vector<double> inv_diag = a.diagonal_entries();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = inv_diag[i] + shift[i];
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(result.x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double r_norm = std::sqrt(dot(r, r));
  result.relative_residual = r_norm / b_norm;
  if (result.relative_residual <= options.tol) return result;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= options.max_iter; ++it) {
    apply(p, ap);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0))
      throw SolverError(ErrorCode::indefinite,
                        "cg_solve: nonpositive curvature " +
                            std::to_string(curvature) + " at iteration " +
                            std::to_string(it),
                        result.relative_residual, it);
    const double step = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    r_norm = std::sqrt(dot(r, r));
    result.relative_residual = r_norm / b_norm;
    result.iterations = it;
    if (!std::isfinite(result.relative_residual))
      throw SolverError(ErrorCode::numeric, "cg_solve: residual is not finite",
                        result.relative_residual, it);
    if (result.relative_residual <= options.tol) return result;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError(ErrorCode::not_converged,
                    "cg_solve: no convergence in " +
                        std::to_string(options.max_iter) +
                        " iterations, relative residual " +
                        std::to_string(result.relative_residual),
                    result.relative_residual, options.max_iter);
}

double min_eigenvalue_estimate(const SparseSymMatrix& a, int iters) {
  const std::size_t n = a.dimension();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "empty matrix");
  const std::size_t steps =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(iters, 1)));

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> basis;
  basis.reserve(steps);
  std::vector<double> q(n);
  for (double& v : q) v = gauss(rng);
  double qn = std::sqrt(dot(q, q));
  for (double& v : q) v /= qn;

  std::vector<double> alpha, beta;
  std::vector<double> w(n);
  double last_beta = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    basis.push_back(q);
    a.multiply(q, w);
    const double aj = dot(q, w);
    alpha.push_back(aj);
    // Full reorthogonalisation against every stored vector, twice.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) {
        const double c = dot(u, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
      }
    last_beta = std::sqrt(dot(w, w));
    const double scale = std::sqrt(std::abs(aj)) + 1.0;
    if (last_beta <= 1e-13 * scale * std::sqrt(static_cast<double>(n))) {
      last_beta = 0.0;
      break;
    }
    if (j + 1 < steps) {
      beta.push_back(last_beta);
      for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / last_beta;
    }
  }

  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < m) {
      t(i, i + 1) = beta[static_cast<std::size_t>(i)];
      t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
  const double ritz = eig.eigenvalues()(0);
  // Residual of the Ritz pair is |beta_m * s_m|, zero when the space is exhausted.
  const double bound = std::abs(last_beta * eig.eigenvectors()(m - 1, 0));
  return ritz - bound;
}

void write_coordinate_text(const SparseSymMatrix& a, std::ostream& out) {
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  out.precision(17);
  for (std::size_t i = 0; i < a.dimension(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      out << i << ' ' << cols[k] << ' ' << vals[k] << '\n';
}

}  // namespace mace
