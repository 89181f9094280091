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

#include <string>

#include "mace/raster.hpp"

namespace mace {

// PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) and binary PNM
// (P5/P6, 8/16-bit). Values are normalised to [0,1]; gray is replicated to
// three channels and alpha dropped.
Image load_image(const std::string& path);
// Loads a single-channel matte (channel mean for color files).
Matte load_matte(const std::string& path);

// Clamps to [0,1] and quantises to `bit_depth` (8 or 16). The format
// follows the extension: .png or .pgm.
void save_matte(const Matte& matte, const std::string& path, int bit_depth = 8);
// .png or .ppm
void save_image(const Image& image, const std::string& path, int bit_depth = 8);

}  // namespace mace
