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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "mace/background.hpp"
#include "mace/error.hpp"
#include "oracles.hpp"

using namespace mace;

namespace {

Image constant_image(int w, int h, double r, double g, double b) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img(x, y, 0) = r;
      img(x, y, 1) = g;
      img(x, y, 2) = b;
    }
  return img;
}

double pixel_sq(const Image& a, const Image& b, int x, int y) {
  double s = 0;
  for (int c = 0; c < 3; ++c) s += std::pow(a(x, y, c) - b(x, y, c), 2);
  return s;
}

LabelRaster single_label(int w, int h) {
  return LabelRaster{w, h, 1, std::vector<int>(static_cast<std::size_t>(w) * h, 0)};
}

}  // namespace

TEST_CASE("bilateral colour distance") {
  std::mt19937_64 rng(1);
  const Image frame = oracle::random_image(9, 7, rng);
  const Image plate = oracle::random_image(9, 7, rng);

  SUBCASE("identical pair") {
    const Matte d = bilateral_color_distance(frame, frame, 5, 5, 2);
    for (double v : d.values()) CHECK(v == 0.0);
  }
  SUBCASE("huge bandwidths give the box mean over the clipped window") {
    const Matte d = bilateral_color_distance(frame, plate, 1e6, 1e6, 2);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        double sum = 0;
        int count = 0;
        for (int yy = std::max(0, y - 2); yy <= std::min(6, y + 2); ++yy)
          for (int xx = std::max(0, x - 2); xx <= std::min(8, x + 2); ++xx, ++count)
            sum += pixel_sq(frame, plate, xx, yy);
        CHECK(d(x, y) == doctest::Approx(sum / count).epsilon(1e-9));
      }
  }
  SUBCASE("radius zero is the pixel distance") {
    const Matte d = bilateral_color_distance(frame, plate, 5, 5, 0);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) CHECK(d(x, y) == doctest::Approx(pixel_sq(frame, plate, x, y)).epsilon(1e-15));
  }
  SUBCASE("intensity scale multiplies colours before squaring") {
    const Matte a = bilateral_color_distance(frame, plate, 5, 5 * 255.0, 2, 255.0);
    const Matte b = bilateral_color_distance(frame, plate, 5, 5, 2, 1.0);
    for (std::size_t i = 0; i < a.pixel_count(); ++i)
      CHECK(a.values()[i] == doctest::Approx(255.0 * 255.0 * b.values()[i]).epsilon(1e-10));
  }
  SUBCASE("weights sum to one") {
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        double s = 0;
        for (double v : bilateral_weights(frame, x, y, 5, 5, 2, 255.0)) s += v;
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(bilateral_color_distance(frame, plate, 0, 5, 2), Error);
    CHECK_THROWS_AS(bilateral_color_distance(frame, plate, 5, 5, -1), Error);
    CHECK_THROWS_AS(bilateral_color_distance(frame, oracle::random_image(8, 7, rng), 5, 5, 2), Error);
  }
}

TEST_CASE("colour term") {
  const double s = 10.0;
  const Matte delta = matte_from({0.0, s * std::sqrt(2.0 * std::log(2.0)), 10.0}, 3, 1);
  const Matte rc = color_term(delta, s);
  CHECK(rc(0, 0) == 0.0);
  CHECK(rc(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rc(2, 0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(color_term(delta, 0.0), Error);
}

TEST_CASE("flood fill superpixels") {
  SUBCASE("constant image is one region") {
    const auto l = flood_fill_superpixels(constant_image(6, 5, 0.2, 0.3, 0.4), 0.05);
    CHECK(l.count == 1);
  }
  SUBCASE("two half planes") {
    Image img = constant_image(8, 6, 0.1, 0.1, 0.1);
    for (int y = 0; y < 6; ++y)
      for (int x = 4; x < 8; ++x) img(x, y, 1) = 0.9;
    const auto l = flood_fill_superpixels(img, 0.05);
    CHECK(l.count == 2);
    CHECK(l(0, 0) != l(7, 5));
  }
  SUBCASE("checkerboard gets one label per pixel") {
    Image img(5, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 5; ++x)
        for (int c = 0; c < 3; ++c) img(x, y, c) = (x + y) % 2 ? 0.8 : 0.2;
    const auto l = flood_fill_superpixels(img, 0.05);
    CHECK(l.count == 20);
  }
  SUBCASE("labels are dense, cover every pixel and form connected regions") {
    std::mt19937_64 rng(2);
    Image img(12, 10);
    // Blocky random image so regions span several pixels.
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x)
        for (int c = 0; c < 3; ++c) img(x, y, c) = 0.1 * ((x / 3 + 2 * (y / 4) + c) % 4);
    const auto l = flood_fill_superpixels(img, 0.05);
    std::set<int> seen(l.labels.begin(), l.labels.end());
    CHECK(static_cast<int>(seen.size()) == l.count);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == l.count - 1);
    // Connectivity: walking 4-neighbours from the first member reaches all.
    for (int lab = 0; lab < l.count; ++lab) {
      std::vector<int> stack;
      std::vector<char> mark(l.labels.size(), 0);
      int members = 0, reached = 0;
      for (std::size_t i = 0; i < l.labels.size(); ++i)
        if (l.labels[i] == lab) {
          if (stack.empty() && !reached) {
            stack.push_back(static_cast<int>(i));
            mark[i] = 1;
          }
          ++members;
        }
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        ++reached;
        const int x = i % 12, y = i / 12;
        const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[1] < 0 || n[0] >= 12 || n[1] >= 10) continue;
          const int j = n[1] * 12 + n[0];
          if (!mark[j] && l.labels[j] == lab) {
            mark[j] = 1;
            stack.push_back(j);
          }
        }
      }
      CHECK(reached == members);
    }
  }
}

TEST_CASE("gradient field") {
  std::mt19937_64 rng(3);
  const Image a = oracle::random_image(6, 6, rng);
  const GradientField same = gradient_field(a, a);
  for (double v : same.theta) CHECK(v == 0.0);
  const GradientField g = gradient_field(a, oracle::random_image(6, 6, rng));
  for (std::size_t i = 0; i < g.theta.size(); ++i) {
    CHECK(g.theta[i] >= 0.0);
    CHECK(g.amp[i] >= 0.0);
  }
  // Bottom-right pixel: both forward differences hit the replicated border.
  CHECK(g.amp.back() == 0.0);
}

TEST_CASE("edge term") {
  SUBCASE("identical frame and plate") {
    std::mt19937_64 rng(4);
    const Image a = oracle::random_image(7, 7, rng);
    const Matte re = edge_term(a, a, flood_fill_superpixels(a, 0.05), 0.01, 0.02);
    for (double v : re.values()) CHECK(v == 0.0);
  }
  SUBCASE("stripe over a flat plate") {
    const Image plate = constant_image(8, 8, 0.4, 0.4, 0.4);
    Image frame = plate;
    for (int y = 0; y < 8; ++y)
      for (int c = 0; c < 3; ++c) frame(3, y, c) = 0.9;
    const Matte re = edge_term(frame, plate, single_label(8, 8), 0.01, 0.02);
    for (double v : re.values()) CHECK(v == 1.0);
  }
  SUBCASE("uniform brightness offset leaves gradients unchanged") {
    std::mt19937_64 rng(5);
    Image plate = oracle::random_image(7, 7, rng);
    for (double& v : plate.values()) v *= 0.8;
    Image frame = plate;
    for (double& v : frame.values()) v += 0.1;
    const Matte re = edge_term(frame, plate, flood_fill_superpixels(frame, 0.05), 0.01, 0.02);
    for (double v : re.values()) CHECK(v == 0.0);
  }
  SUBCASE("hand count inside one superpixel") {
    // Plate: 0.2 left of column 2, 0.8 from column 2 on.
    Image plate = constant_image(6, 6, 0.2, 0.2, 0.2);
    for (int y = 0; y < 6; ++y)
      for (int x = 2; x < 6; ++x)
        for (int c = 0; c < 3; ++c) plate(x, y, c) = 0.8;
    // Frame: edge moved to column 4 everywhere. Strong pixels are column 1
    // (plate edge) and column 3 (frame edge); all 12 differ.
    Image moved = constant_image(6, 6, 0.2, 0.2, 0.2);
    for (int y = 0; y < 6; ++y)
      for (int x = 4; x < 6; ++x)
        for (int c = 0; c < 3; ++c) moved(x, y, c) = 0.8;
    CHECK(edge_term(moved, plate, single_label(6, 6), 0.01, 0.02)(0, 0) == 1.0);

    // Frame: edge moved in rows 0-2 only. Rows 0-1 give 2 strong, differing
    // pixels each; row 2 adds the vertical step at columns 2-3, so 3 strong
    // differing pixels; rows 3-5 match the plate, 1 strong equal pixel each.
    // 7 of 10 strong pixels differ.
    Image half = plate;
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 3; ++c) half(x, y, c) = x >= 4 ? 0.8 : 0.2;
    const Matte re = edge_term(half, plate, single_label(6, 6), 0.01, 0.02);
    for (double v : re.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("constant within each superpixel and bounded") {
    std::mt19937_64 rng(6);
    Image frame(10, 10), plate(10, 10);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x)
        for (int c = 0; c < 3; ++c) {
          frame(x, y, c) = 0.25 * ((x / 3 + y / 4) % 3);
          plate(x, y, c) = 0.25 * ((x / 4 + y / 3) % 3);
        }
    const auto labels = flood_fill_superpixels(frame, 0.05);
    const Matte re = edge_term(frame, plate, labels, 0.01, 0.02);
    std::vector<double> value(static_cast<std::size_t>(labels.count), -1.0);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
      const auto s = static_cast<std::size_t>(labels.labels[i]);
      CHECK(re.values()[i] >= 0.0);
      CHECK(re.values()[i] <= 1.0);
      if (value[s] < 0) value[s] = re.values()[i];
      CHECK(re.values()[i] == value[s]);
    }
  }
}

TEST_CASE("background prior composition") {
  std::mt19937_64 rng(7);
  const Image frame = oracle::random_image(12, 9, rng);
  const Image plate = oracle::random_image(12, 9, rng);
  const BackgroundPrior p = build_background_prior(frame, plate);
  for (std::size_t i = 0; i < p.r0.pixel_count(); ++i) {
    const double rc = p.rc.values()[i], re = p.re.values()[i], r0 = p.r0.values()[i];
    CHECK(r0 == rc * re);
    CHECK(rc >= 0.0);
    CHECK(rc <= 1.0);
    CHECK(re >= 0.0);
    CHECK(re <= 1.0);
    CHECK(r0 <= rc);
    CHECK(r0 <= re);
  }
  const BackgroundPrior same = build_background_prior(frame, frame);
  for (double v : same.r0.values()) CHECK(v == 0.0);
}

TEST_CASE("background agent closed form") {
  SUBCASE("examples") {
    const std::vector<double> z{0.3, 0.9}, r0 = z;
    const Vector a = background_agent_eval(z, r0, 2.0, 0.0);
    CHECK(a[0] == doctest::Approx(0.3));
    CHECK(a[1] == doctest::Approx(0.9));
    const Vector b = background_agent_eval(std::vector<double>{0.1, 0.7}, r0, 0.0, 0.0);
    CHECK(b[0] == doctest::Approx(0.3));
    CHECK(b[1] == doctest::Approx(0.9));
    const Vector c = background_agent_eval(std::vector<double>{1.0}, std::vector<double>{1.0}, 2.0, 0.05);
    CHECK(c[0] == doctest::Approx(5.95 / 5.9).epsilon(1e-15));
  }
  SUBCASE("matches golden-section minimisation") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 2000; ++t) {
      const double r0 = u(rng), z = 1.5 * u(rng) - 0.25, lambda2 = 4 * u(rng), gamma = u(rng);
      const double got = background_agent_eval(std::vector<double>{z}, std::vector<double>{r0}, lambda2, gamma)[0];
      const long double lr0 = r0, lz = z, ll = lambda2, lg = gamma;
      const double want = oracle::golden_section(
          [&](long double a) { return (a - lr0) * (a - lr0) + ll * (a - lz) * (a - lz) + lg * a * (1 - a); },
          -3.0L, 4.0L);
      CHECK(std::abs(got - want) <= 1e-8);
    }
  }
  SUBCASE("firmly nonexpansive for gamma < 1") {
    std::mt19937_64 rng(9);
    const auto r0 = oracle::random_vector(64, rng);
    for (double gamma : {0.0, 0.05, 0.5, 0.99}) {
      const AgentOp f = make_background_agent(r0, 2.0, gamma);
      CHECK(check_firm_nonexpansiveness(f, [&] { return oracle::random_vector(64, rng, -1, 2); }, 500) <= 1e-9);
    }
  }
  SUBCASE("parameter errors") {
    const std::vector<double> v{0.5};
    CHECK_THROWS_AS(background_agent_eval(v, v, 0.0, 1.0), Error);
    CHECK_THROWS_AS(background_agent_eval(v, v, -1.0, 0.0), Error);
    CHECK_THROWS_AS(background_agent_eval(v, std::vector<double>{0.5, 0.5}, 2.0, 0.05), Error);
    CHECK_THROWS_AS(make_background_agent(v, 0.0, 1.5), Error);
  }
}
