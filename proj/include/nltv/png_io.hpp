#pragma once

// Grayscale PNG import/export. Requires linking against libpng.

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include "nltv/image_io.hpp"

namespace nltv {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Reads an 8-bit grayscale PNG. Color or 16-bit inputs are rejected rather than converted.
inline Raster read_png(const std::filesystem::path& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(path.string() + ": cannot open for reading");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: out of memory");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": malformed PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  const bool gray = color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA;
  if (!gray || bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": only 8-bit grayscale PNG is supported");
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  pixels.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Raster img(static_cast<int>(height), static_cast<int>(width));
  for (std::size_t k = 0; k < pixels.size(); ++k) img[k] = pixels[k];
  return img;
}

inline void write_png(const std::filesystem::path& path, const Raster& img) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(path.string() + ": cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: out of memory");
  }
  auto bytes = to_bytes(img);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.rows()));
  for (int r = 0; r < img.rows(); ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * img.cols();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": PNG encoding failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()), static_cast<png_uint_32>(img.rows()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Dispatches on extension: .png via libpng, anything else as PGM.
inline Raster read_image(const std::filesystem::path& path) {
  if (path.extension() == ".png" || path.extension() == ".PNG") return read_png(path);
  return read_pgm(path);
}

inline void write_image(const std::filesystem::path& path, const Raster& img) {
  if (path.extension() == ".png" || path.extension() == ".PNG")
    write_png(path, img);
  else
    write_pgm(path, img);
}

}  // namespace nltv
