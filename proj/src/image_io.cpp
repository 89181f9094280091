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

#include "mace/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "mace/error.hpp"

namespace mace {
namespace {

// Decoded samples before normalisation.
struct RawImage {
  int width = 0, height = 0, channels = 0, bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

std::string extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  (void)png;
  throw Error(ErrorCode::io, std::string("png: ") + msg);
}

void png_warn(png_structp, png_const_charp) {}

RawImage read_png(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw Error(ErrorCode::io, "'" + path + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::internal, "png: allocation failed");
  }
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // native little-endian uint16 rows
  png_read_update_info(png, info);

  RawImage raw;
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  if (raw.channels != 1 && raw.channels != 3)
    throw Error(ErrorCode::io, "png: unsupported channel layout in '" + path + "'");

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buffer(rowbytes * raw.height);
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(count);
  for (int y = 0; y < raw.height; ++y) {
    const std::size_t row_samples = static_cast<std::size_t>(raw.width) * raw.channels;
    for (std::size_t k = 0; k < row_samples; ++k) {
      std::uint16_t v;
      if (raw.bit_depth == 16) {
        v = static_cast<std::uint16_t>(rows[y][2 * k] | (rows[y][2 * k + 1] << 8));
      } else {
        v = rows[y][k];
      }
      raw.samples[y * row_samples + k] = v;
    }
  }
  return raw;
}

void write_png(const std::string& path, int width, int height, int channels,
               int bit_depth, const std::vector<std::uint16_t>& samples) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::internal, "png: allocation failed");
  }
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
  const std::size_t bytes = bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> row(row_samples * bytes);
  for (int y = 0; y < height; ++y) {
    for (std::size_t k = 0; k < row_samples; ++k) {
      const std::uint16_t v = samples[y * row_samples + k];
      if (bit_depth == 16) {
        row[2 * k] = static_cast<unsigned char>(v >> 8);  // PNG is big-endian
        row[2 * k + 1] = static_cast<unsigned char>(v & 0xff);
      } else {
        row[k] = static_cast<unsigned char>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      break;
    }
    c = in.peek();
  }
  int v = -1;
  in >> v;
  if (!in || v < 0) throw Error(ErrorCode::io, "pnm: malformed header");
  return v;
}

RawImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw Error(ErrorCode::io, "'" + path + "' is not a binary PGM/PPM file");
  RawImage raw;
  raw.channels = magic[1] == '5' ? 1 : 3;
  raw.width = read_pnm_int(in);
  raw.height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::io, "pnm: bad maxval");
  raw.bit_depth = maxval > 255 ? 16 : 8;
  in.get();  // single whitespace before the raster

  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  const std::size_t bytes = raw.bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> buffer(count * bytes);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size())
    throw Error(ErrorCode::io, "pnm: truncated raster in '" + path + "'");
  raw.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    raw.samples[k] = bytes == 2
                         ? static_cast<std::uint16_t>((buffer[2 * k] << 8) | buffer[2 * k + 1])
                         : buffer[k];
  if (maxval != 255 && maxval != 65535) {
    // Rescale odd maxvals onto the nominal depth.
    const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
    for (auto& s : raw.samples)
      s = static_cast<std::uint16_t>(std::lround(s * full / maxval));
  }
  return raw;
}

void write_pnm(const std::string& path, int width, int height, int channels,
               int bit_depth, const std::vector<std::uint16_t>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << (channels == 1 ? "P5" : "P6") << '\n'
      << width << ' ' << height << '\n'
      << (bit_depth == 16 ? 65535 : 255) << '\n';
  std::vector<unsigned char> buffer;
  buffer.reserve(samples.size() * (bit_depth == 16 ? 2 : 1));
  for (std::uint16_t s : samples) {
    if (bit_depth == 16) {
      buffer.push_back(static_cast<unsigned char>(s >> 8));
      buffer.push_back(static_cast<unsigned char>(s & 0xff));
    } else {
      buffer.push_back(static_cast<unsigned char>(s));
    }
  }
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

RawImage read_raw(const std::string& path) {
  const std::string ext = extension(path);
  if (ext == "png") return read_png(path);
  if (ext == "pgm" || ext == "ppm" || ext == "pnm") return read_pnm(path);
  throw Error(ErrorCode::io, "unsupported image format '" + path + "'");
}

std::vector<std::uint16_t> quantize(std::span<const double> values, int bit_depth) {
  const double full = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<std::uint16_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
    out[i] = static_cast<std::uint16_t>(std::lround(v * full));
  }
  return out;
}

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw Error(ErrorCode::invalid_argument, "bit depth must be 8 or 16");
}

}  // namespace

Image load_image(const std::string& path) {
  const RawImage raw = read_raw(path);
  const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
  Image img(raw.width, raw.height);
  auto values = img.values();
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) {
      const std::size_t src = raw.channels == 1 ? p : 3 * p + c;
      values[3 * p + c] = raw.samples[src] / full;
    }
  return img;
}

Matte load_matte(const std::string& path) {
  const RawImage raw = read_raw(path);
  const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
  Matte m(raw.width, raw.height);
  for (std::size_t p = 0; p < m.pixel_count(); ++p) {
    double s = 0.0;
    for (int c = 0; c < raw.channels; ++c) s += raw.samples[raw.channels * p + c];
    m.values()[p] = s / (raw.channels * full);
  }
  return m;
}

void save_matte(const Matte& matte, const std::string& path, int bit_depth) {
  check_depth(bit_depth);
  const std::string ext = extension(path);
  const auto samples = quantize(matte.values(), bit_depth);
  if (ext == "png")
    write_png(path, matte.width(), matte.height(), 1, bit_depth, samples);
  else if (ext == "pgm")
    write_pnm(path, matte.width(), matte.height(), 1, bit_depth, samples);
  else
    throw Error(ErrorCode::io, "matte output must be .png or .pgm: '" + path + "'");
}

void save_image(const Image& image, const std::string& path, int bit_depth) {
  check_depth(bit_depth);
  const std::string ext = extension(path);
  const auto samples = quantize(image.values(), bit_depth);
  if (ext == "png")
    write_png(path, image.width(), image.height(), 3, bit_depth, samples);
  else if (ext == "ppm")
    write_pnm(path, image.width(), image.height(), 3, bit_depth, samples);
  else
    throw Error(ErrorCode::io, "image output must be .png or .ppm: '" + path + "'");
}

}  // namespace mace
