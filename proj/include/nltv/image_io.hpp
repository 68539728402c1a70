#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltv/raster.hpp"

namespace nltv {

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Clamp to [0,255] and round half away from zero.
inline std::uint8_t quantize(double x) {
  if (!(x > 0.0)) return 0;  // also maps NaN to 0
  if (x >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::round(x));
}

inline std::vector<std::uint8_t> to_bytes(const Raster& img) {
  std::vector<std::uint8_t> out(img.size());
  std::transform(img.values().begin(), img.values().end(), out.begin(), quantize);
  return out;
}

inline Raster quantized(const Raster& img) {
  Raster out = img;
  for (auto& x : out.values()) x = quantize(x);
  return out;
}

// ---------------------------------------------------------------------------
// PGM

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      in.get();
    } else {
      return;
    }
  }
}

inline long read_pnm_int(std::istream& in, const std::string& path) {
  skip_pnm_space(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw IoError(path + ": malformed PGM header");
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace detail

/// Reads binary (P5) or ASCII (P2) graymaps with maxval <= 255; bytes map to reals exactly.
inline Raster read_pgm(std::istream& in, const std::string& path = "<stream>") {
  std::array<char, 2> magic{};
  if (!in.read(magic.data(), 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2'))
    throw IoError(path + ": not a P5/P2 graymap");
  const long cols = detail::read_pnm_int(in, path);
  const long rows = detail::read_pnm_int(in, path);
  const long maxval = detail::read_pnm_int(in, path);
  if (rows < 1 || cols < 1 || rows > (1 << 16) || cols > (1 << 16))
    throw IoError(path + ": unsupported PGM size");
  if (maxval < 1 || maxval > 255) throw IoError(path + ": only 8-bit PGM is supported");
  Raster img(static_cast<int>(rows), static_cast<int>(cols));
  if (magic[1] == '5') {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(img.size());
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw IoError(path + ": truncated PGM pixel data");
    for (std::size_t k = 0; k < buf.size(); ++k) img[k] = buf[k];
  } else {
    for (auto& x : img.values()) x = static_cast<double>(detail::read_pnm_int(in, path));
  }
  return img;
}

inline Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  return read_pgm(in, path.string());
}

inline void write_pgm(std::ostream& out, const Raster& img) {
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  const auto bytes = to_bytes(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_pgm(const std::filesystem::path& path, const Raster& img) {
  auto out = detail::open_for_write(path);
  write_pgm(out, img);
  if (!out) throw IoError(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// NLTVF1 lossless float dump: "NLTVF1", u32 rows, u32 cols, rows*cols f64, all little-endian.

inline constexpr std::string_view kFloatDumpMagic = "NLTVF1";

namespace detail {

template <class U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b{};
  for (std::size_t k = 0; k < sizeof(U); ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(b.data(), b.size());
}

template <class U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(p[k]) << (8 * k);
  return v;
}

}  // namespace detail

inline void write_float_dump(std::ostream& out, const Raster& img) {
  out.write(kFloatDumpMagic.data(), kFloatDumpMagic.size());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.rows()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.cols()));
  for (double x : img.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
}

inline void write_float_dump(const std::filesystem::path& path, const Raster& img) {
  auto out = detail::open_for_write(path);
  write_float_dump(out, img);
  if (!out) throw IoError(path.string() + ": write failed");
}

/// Several planes back to back in one file (e.g. real and imaginary parts of a spectrum).
inline void write_float_dump(const std::filesystem::path& path, std::span<const Raster> planes) {
  auto out = detail::open_for_write(path);
  for (const auto& p : planes) write_float_dump(out, p);
  if (!out) throw IoError(path.string() + ": write failed");
}

/// Parses every plane stored in the buffer.
inline std::vector<Raster> parse_float_dump(const std::string& bytes, const std::string& path = "<buffer>") {
  std::vector<Raster> planes;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t pos = 0;
  const std::size_t header = kFloatDumpMagic.size() + 8;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < header || bytes.compare(pos, kFloatDumpMagic.size(), kFloatDumpMagic) != 0)
      throw IoError(path + ": bad NLTVF1 header at byte " + std::to_string(pos));
    const auto rows = detail::get_le<std::uint32_t>(p + pos + 6);
    const auto cols = detail::get_le<std::uint32_t>(p + pos + 10);
    pos += header;
    if (rows == 0 || cols == 0 || rows > (1u << 16) || cols > (1u << 16))
      throw IoError(path + ": invalid NLTVF1 dimensions");
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    if (bytes.size() - pos < count * 8) throw IoError(path + ": truncated NLTVF1 payload");
    Raster img(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t k = 0; k < count; ++k, pos += 8)
      img[k] = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + pos));
    planes.push_back(std::move(img));
  }
  if (planes.empty()) throw IoError(path + ": empty NLTVF1 file");
  return planes;
}

inline std::vector<Raster> read_float_dump_planes(const std::filesystem::path& path) {
  return parse_float_dump(detail::read_file(path), path.string());
}

inline Raster read_float_dump(const std::filesystem::path& path) {
  return std::move(read_float_dump_planes(path).front());
}

}  // namespace nltv
