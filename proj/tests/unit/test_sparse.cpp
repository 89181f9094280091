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

#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mace/error.hpp"
#include "mace/matting.hpp"
#include "mace/sparse.hpp"
#include "oracles.hpp"

using namespace mace;

namespace {

WindowBlock random_block(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  WindowBlock b;
  b.indices.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
  std::uniform_real_distribution<double> u(-1, 1);
  b.block.assign(m * m, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = r; c < m; ++c) b.block[r * m + c] = b.block[c * m + r] = u(rng);
  return b;
}

// Random SPD matrix as a single dense block.
SparseSymMatrix random_spd(std::size_t n, std::mt19937_64& rng, Eigen::MatrixXd* out) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd m(n, n);
  for (auto& v : m.reshaped()) v = u(rng);
  Eigen::MatrixXd spd = m * m.transpose() + static_cast<double>(n) * 0.05 * Eigen::MatrixXd::Identity(n, n);
  WindowBlock b;
  for (std::size_t i = 0; i < n; ++i) b.indices.push_back(i);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) b.block.push_back(spd(r, c));
  // Symmetrise exactly; the product is symmetric only up to rounding.
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) b.block[c * n + r] = b.block[r * n + c];
  std::vector<WindowBlock> blocks{b};
  if (out) {
    *out = Eigen::Map<Eigen::MatrixXd>(b.block.data(), n, n);
  }
  return assemble_from_window_blocks(n, blocks);
}

}  // namespace

TEST_CASE("single block assembly") {
  const std::vector<WindowBlock> blocks{{{0, 1}, {2, -1, -1, 2}}};
  const SparseSymMatrix a = assemble_from_window_blocks(3, blocks);
  CHECK(a.nonzeros() == 4);
  CHECK(a.at(0, 0) == 2);
  CHECK(a.at(0, 1) == -1);
  CHECK(a.at(1, 0) == -1);
  CHECK(a.at(1, 1) == 2);
  CHECK(a.at(2, 2) == 0);
}

TEST_CASE("overlapping blocks add") {
  const std::vector<WindowBlock> blocks{{{0}, {1}}, {{0, 2}, {1, 0, 0, 3}}};
  const SparseSymMatrix a = assemble_from_window_blocks(3, blocks);
  CHECK(a.at(0, 0) == 2);
  CHECK(a.at(2, 2) == 3);
}

TEST_CASE("assembly matches dense accumulation and ignores block order") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 30 + static_cast<std::size_t>(trial) * 7;
    std::vector<WindowBlock> blocks;
    for (int k = 0; k < 25; ++k) blocks.push_back(random_block(n, 2 + k % 6, rng));

    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
    for (const auto& b : blocks) {
      const std::size_t m = b.indices.size();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) expect(b.indices[r], b.indices[c]) += b.block[r * m + c];
    }
    const SparseSymMatrix a = assemble_from_window_blocks(n, blocks);
    CHECK((oracle::dense(a) - expect).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(a.asymmetry() <= 1e-12);

    // No duplicate entries and sorted columns within each row.
    const auto rp = a.row_ptr();
    const auto cols = a.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = rp[i] + 1; k < rp[i + 1]; ++k) CHECK(cols[k - 1] < cols[k]);

    std::shuffle(blocks.begin(), blocks.end(), rng);
    CHECK(assemble_from_window_blocks(n, blocks).values().size() == a.values().size());
    const SparseSymMatrix b = assemble_from_window_blocks(n, blocks);
    CHECK(std::equal(b.values().begin(), b.values().end(), a.values().begin()));
  }
}

TEST_CASE("assembly rejects bad blocks") {
  std::vector<WindowBlock> out_of_range{{{0, 3}, {1, 0, 0, 1}}};
  CHECK_THROWS_AS(assemble_from_window_blocks(3, out_of_range), Error);
  std::vector<WindowBlock> asymmetric{{{0, 1}, {1, 2, 0, 1}}};
  CHECK_THROWS_AS(assemble_from_window_blocks(3, asymmetric), Error);
  std::vector<WindowBlock> short_block{{{0, 1}, {1, 2}}};
  CHECK_THROWS_AS(assemble_from_window_blocks(3, short_block), Error);
}

TEST_CASE("diagonal matrices reject negative entries") {
  CHECK_THROWS_AS(DiagMatrix(std::vector<double>{1.0, -0.1}), Error);
  CHECK_THROWS_AS(DiagMatrix(std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("cg on trivial systems") {
  const auto a = SparseSymMatrix::identity(6);
  const std::vector<double> b{1, -2, 3, 0.5, 0, 7};
  CHECK(cg_solve(a, DiagMatrix::zeros(6), b, {}).x == b);
  const auto zero = cg_solve(a, DiagMatrix::zeros(6), std::vector<double>(6, 0.0), {});
  CHECK(zero.x == std::vector<double>(6, 0.0));
  CHECK(zero.iterations == 0);
}

TEST_CASE("cg matches a dense factorisation") {
  std::mt19937_64 rng(8);
  for (std::size_t n : {50u, 120u, 400u}) {
    Eigen::MatrixXd dense;
    const SparseSymMatrix a = random_spd(n, rng, &dense);
    const auto shift_v = oracle::random_vector(n, rng, 0, 0.5);
    const auto b = oracle::random_vector(n, rng, -1, 1);
    CgOptions opt;
    opt.tol = 1e-8;
    opt.max_iter = 20000;
    const auto res = cg_solve(a, DiagMatrix(shift_v), b, opt);
    Eigen::MatrixXd full = dense;
    full.diagonal() += Eigen::Map<const Eigen::VectorXd>(shift_v.data(), n);
    const Eigen::VectorXd ref = full.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
    const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(res.x.data(), n);
    CHECK((got - ref).norm() / ref.norm() <= 10 * 1e-6);
    CHECK(res.relative_residual <= opt.tol);
  }
}

TEST_CASE("cg reports failures") {
  SUBCASE("indefinite") {
    const std::vector<double> d{1.0, -1.0};
    const auto a = SparseSymMatrix::diagonal(d);
    try {
      cg_solve(a, DiagMatrix::zeros(2), std::vector<double>{0.0, 1.0}, {});
      FAIL("expected an error");
    } catch (const SolverError& e) {
      CHECK(e.code() == ErrorCode::indefinite);
    }
  }
  SUBCASE("budget exhausted") {
    std::mt19937_64 rng(1);
    const SparseSymMatrix a = random_spd(60, rng, nullptr);
    CgOptions opt;
    opt.tol = 1e-14;
    opt.max_iter = 2;
    try {
      cg_solve(a, DiagMatrix::zeros(60), oracle::random_vector(60, rng), opt);
      FAIL("expected an error");
    } catch (const SolverError& e) {
      CHECK(e.code() == ErrorCode::not_converged);
      CHECK(e.iterations() == 2);
      CHECK(e.residual() > opt.tol);
    }
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(cg_solve(SparseSymMatrix::identity(3), DiagMatrix::zeros(2),
                             std::vector<double>{1, 1, 1}, {}),
                    Error);
  }
}

TEST_CASE("smallest eigenvalue estimates") {
  CHECK(min_eigenvalue_estimate(SparseSymMatrix::identity(10), 10) == doctest::Approx(1.0));
  const std::vector<double> d{1, 2, 3};
  CHECK(min_eigenvalue_estimate(SparseSymMatrix::diagonal(d), 3) == doctest::Approx(1.0));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseSymMatrix a = random_spd(80, rng, nullptr);
    const double truth = oracle::min_eigenvalue(oracle::dense(a));
    const double est = min_eigenvalue_estimate(a, 80);
    CHECK(est <= truth + 1e-9 * std::abs(truth));
    CHECK(est == doctest::Approx(truth).epsilon(1e-6));
  }
}

TEST_CASE("dual-layer Laplacian on a random 8x8 pair is positive definite") {
  std::mt19937_64 rng(5);
  const Image frame = oracle::random_image(8, 8, rng);
  const Image plate = oracle::random_image(8, 8, rng);
  const auto lap = build_dual_laplacian(frame, plate, {1.0, 1e-7});
  const double truth = oracle::min_eigenvalue(oracle::dense(lap.matrix));
  CHECK(truth > 0.0);
  CHECK(min_eigenvalue_estimate(lap.matrix, 64) > 0.0);
}

TEST_CASE("coordinate dump lists every stored entry") {
  const std::vector<WindowBlock> blocks{{{0, 1}, {2, -1, -1, 2}}};
  std::ostringstream os;
  write_coordinate_text(assemble_from_window_blocks(2, blocks), os);
  CHECK(os.str() == "0 0 2\n0 1 -1\n1 0 -1\n1 1 2\n");
}
