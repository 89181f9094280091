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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mace/error.hpp"
#include "mace/image_io.hpp"
#include "oracles.hpp"

using namespace mace;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const char* env = std::getenv("MACE_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "mace_tests";
  p /= "image_io";
  fs::create_directories(p);
  return p;
}

Matte random_matte(int w, int h, std::mt19937_64& rng) {
  return matte_from(oracle::random_vector(static_cast<std::size_t>(w) * h, rng), w, h);
}

}  // namespace

TEST_CASE("matte round trips stay within one quantisation step") {
  std::mt19937_64 rng(1);
  const Matte m = random_matte(17, 11, rng);
  for (const char* ext : {".png", ".pgm"}) {
    for (int depth : {8, 16}) {
      const fs::path path = scratch_dir() / (std::string("m") + std::to_string(depth) + ext);
      save_matte(m, path.string(), depth);
      const Matte back = load_matte(path.string());
      REQUIRE(back.same_size(m));
      const double step = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
      for (std::size_t i = 0; i < m.pixel_count(); ++i)
        CHECK(std::abs(back.values()[i] - m.values()[i]) <= step);
      // Loading quantised values again is lossless.
      save_matte(back, path.string(), depth);
      CHECK(load_matte(path.string()) == back);
    }
  }
}

TEST_CASE("saving clamps to [0,1]") {
  const fs::path path = scratch_dir() / "clamp.png";
  save_matte(matte_from({-0.5, 0.25, 1.7}, 3, 1), path.string());
  const Matte back = load_matte(path.string());
  CHECK(back(0, 0) == 0.0);
  CHECK(back(2, 0) == 1.0);
  CHECK(back(1, 0) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("colour images round trip and grey replicates") {
  std::mt19937_64 rng(2);
  const Image img = oracle::random_image(9, 6, rng);
  for (const char* ext : {".png", ".ppm"})
    for (int depth : {8, 16}) {
      const fs::path path = scratch_dir() / (std::string("c") + std::to_string(depth) + ext);
      save_image(img, path.string(), depth);
      const Image back = load_image(path.string());
      const double step = depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
      for (std::size_t i = 0; i < img.storage().size(); ++i)
        CHECK(std::abs(back.storage()[i] - img.storage()[i]) <= step);
      // A colour file read as a matte averages the channels.
      const Matte mean = load_matte(path.string());
      CHECK(mean(2, 3) == doctest::Approx((back(2, 3, 0) + back(2, 3, 1) + back(2, 3, 2)) / 3.0));
    }
  const fs::path grey = scratch_dir() / "grey.pgm";
  save_matte(matte_from({0.0, 1.0}, 2, 1), grey.string());
  const Image g = load_image(grey.string());
  CHECK(g(1, 0, 0) == 1.0);
  CHECK(g(1, 0, 2) == 1.0);
}

TEST_CASE("I/O errors") {
  CHECK_THROWS_AS(load_image((scratch_dir() / "missing.png").string()), Error);
  const fs::path junk = scratch_dir() / "junk.png";
  std::ofstream(junk) << "not an image";
  try {
    load_image(junk.string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  const fs::path truncated = scratch_dir() / "short.pgm";
  std::ofstream(truncated, std::ios::binary) << "P5\n4 4\n255\nab";
  CHECK_THROWS_AS(load_image(truncated.string()), Error);
  CHECK_THROWS_AS(load_image((scratch_dir() / "x.bmp").string()), Error);
  CHECK_THROWS_AS(save_matte(Matte(2, 2), (scratch_dir() / "m.jpg").string()), Error);
  CHECK_THROWS_AS(save_matte(Matte(2, 2), (scratch_dir() / "m.png").string(), 12), Error);
}
