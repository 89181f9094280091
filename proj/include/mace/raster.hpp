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
#include <span>
#include <string>
#include <vector>

#include "mace/error.hpp"

namespace mace {

// Row-major, channel-interleaved raster of doubles.
template <int Channels>
class Raster {
 public:
  static constexpr int channels = Channels;

  Raster() = default;
  Raster(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw Error(ErrorCode::invalid_argument, "negative raster dimensions");
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int x, int y, int c = 0) noexcept {
    return data_[index(x, y) * Channels + c];
  }
  double operator()(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y) * Channels + c];
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  bool same_size(int w, int h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <int C>
  bool same_size(const Raster<C>& other) const noexcept {
    return same_size(other.width(), other.height());
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// H x W x 3 color raster in [0,1].
using Image = Raster<3>;
// H x W scalar raster, nominally in [0,1].
using Matte = Raster<1>;

// Wraps a flat vector as a matte of the given size.
Matte matte_from(std::vector<double> values, int width, int height);

std::string size_string(int width, int height);

template <int A, int B>
void require_same_size(const Raster<A>& a, const Raster<B>& b,
                       const char* what) {
  if (!a.same_size(b))
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": " + size_string(a.width(), a.height()) +
                    " vs " + size_string(b.width(), b.height()));
}

}  // namespace mace
