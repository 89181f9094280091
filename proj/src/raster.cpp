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

#include "mace/raster.hpp"

#include "mace/error.hpp"

namespace mace {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::numeric: return "numeric error";
    case ErrorCode::not_converged: return "not converged";
    case ErrorCode::indefinite: return "indefinite system";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

Matte matte_from(std::vector<double> values, int width, int height) {
  Matte m(width, height);
  if (values.size() != m.pixel_count())
    throw Error(ErrorCode::dimension_mismatch,
                "matte_from: " + std::to_string(values.size()) +
                    " values for " + size_string(width, height));
  m.storage() = std::move(values);
  return m;
}

std::string size_string(int width, int height) {
  return std::to_string(width) + "x" + std::to_string(height);
}

}  // namespace mace
