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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace mace {

// Symmetric matrix in compressed sparse rows. Both triangles are stored and
// column indices within each row are sorted and unique.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  // Takes ownership of validated CSR arrays.
  SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                  std::vector<std::size_t> cols, std::vector<double> values);

  static SparseSymMatrix identity(std::size_t n);
  static SparseSymMatrix diagonal(std::span<const double> d);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> cols() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }

  // Entry lookup by binary search; 0 when not stored.
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal_entries() const;

  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  // x^T A x
  double quadratic_form(std::span<const double> x) const;

  // Largest |A_ij - A_ji| over stored entries.
  double asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

// Nonnegative diagonal shift.
class DiagMatrix {
 public:
  DiagMatrix() = default;
  explicit DiagMatrix(std::vector<double> entries);
  static DiagMatrix zeros(std::size_t n) { return DiagMatrix(std::vector<double>(n, 0.0)); }

  std::size_t dimension() const noexcept { return d_.size(); }
  std::span<const double> entries() const noexcept { return d_; }
  double operator[](std::size_t i) const noexcept { return d_[i]; }

 private:
  std::vector<double> d_;
};

struct WindowBlock {
  std::vector<std::size_t> indices;
  std::vector<double> block;  // row-major |indices| x |indices|
};

// Entry (i,j) is the sum of all block contributions touching (i,j).
SparseSymMatrix assemble_from_window_blocks(std::size_t n,
                                            std::span<const WindowBlock> blocks);

struct CgOptions {
  double tol = 1e-6;
  int max_iter = 2000;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Solves (A + shift) x = b with Jacobi-preconditioned conjugate gradients.
// Throws SolverError on non-convergence or negative curvature.
CgResult cg_solve(const SparseSymMatrix& a, const DiagMatrix& shift,
                  std::span<const double> b, const CgOptions& options,
                  std::span<const double> initial_guess = {});

// Smallest Ritz value of a Lanczos run with full reorthogonalisation, less
// the Ritz residual bound. Exact when iters >= n.
double min_eigenvalue_estimate(const SparseSymMatrix& a, int iters);

// One "row col value" line per stored entry.
void write_coordinate_text(const SparseSymMatrix& a, std::ostream& out);

}  // namespace mace
