/* Copyright 2026 The PlaneSeg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "planeseg/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "planeseg/errors.hpp"

namespace planeseg {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  (void)png;
  throw FormatError(std::string("png: ") + msg);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

Image16 read_png16_gray(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) {
    throw IoError("cannot open for reading: " + path.string());
  }

  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 ||
      png_sig_cmp(header, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_fn, png_warn_fn);
  if (!png) throw IoError("png: failed to allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: failed to allocate info struct");
  }

  Image16 img;
  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16) {
      throw FormatError(path.string() +
                        ": expected 16-bit single-channel grayscale, got " +
                        std::to_string(bit_depth) + "-bit color type " +
                        std::to_string(color_type));
    }

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.values.resize(static_cast<std::size_t>(img.width) * img.height);

    // PNG stores 16-bit samples big-endian; swap on little-endian hosts.
    png_set_swap(png);

    std::vector<png_bytep> rows(img.height);
    for (int r = 0; r < img.height; ++r) {
      rows[r] = reinterpret_cast<png_bytep>(
          img.values.data() + static_cast<std::size_t>(r) * img.width);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png16_gray(const std::filesystem::path& path, const Image16& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.values.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ShapeError("write_png16_gray: inconsistent image dimensions");
  }
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) {
    throw IoError("cannot open for writing: " + path.string());
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_fn, png_warn_fn);
  if (!png) throw IoError("png: failed to allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: failed to allocate info struct");
  }

  try {
    png_init_io(png, file.get());
    // Pin encoder parameters: output bytes must not depend on library
    // default drift.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);

    std::vector<png_bytep> rows(img.height);
    for (int r = 0; r < img.height; ++r) {
      rows[r] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(
          img.values.data() + static_cast<std::size_t>(r) * img.width));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError("failed to flush: " + path.string());
  }
}

}  // namespace planeseg
