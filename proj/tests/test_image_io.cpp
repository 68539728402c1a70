#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "nltv/image_io.hpp"
#include "nltv/png_io.hpp"
#include "support.hpp"

using namespace nltv;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nltv_io_test";
  fs::create_directories(dir);
  return dir / name;
}

Raster byte_image(int rows, int cols, std::uint64_t seed) {
  Raster r = oracle::random_raster(rows, cols, seed, 0.0, 256.0);
  for (auto& x : r.values()) x = std::floor(x);
  return r;
}

}  // namespace

TEST(Quantize, ClampsAndRoundsHalfAway) {
  EXPECT_EQ(quantize(-3.0), 0);
  EXPECT_EQ(quantize(300.0), 255);
  EXPECT_EQ(quantize(2.5), 3);
  EXPECT_EQ(quantize(2.4999), 2);
  EXPECT_EQ(quantize(254.5), 255);
}

TEST(Pgm, BinaryRoundTripIsExact) {
  const Raster img = byte_image(13, 17, 1);
  std::stringstream ss;
  write_pgm(ss, img);
  EXPECT_EQ(read_pgm(ss), img);
}

TEST(Pgm, ReadsAsciiWithComments) {
  std::stringstream ss("P2\n# comment\n3 2\n255\n0 1 2\n250 251 255\n");
  const Raster img = read_pgm(ss);
  ASSERT_EQ(img.rows(), 2);
  ASSERT_EQ(img.cols(), 3);
  EXPECT_EQ(img(1, 0), 250.0);
}

TEST(Pgm, RejectsGarbage) {
  std::stringstream bad("P6\n2 2\n255\n");
  EXPECT_THROW(read_pgm(bad), IoError);
  std::stringstream truncated("P5\n4 4\n255\nabc");
  EXPECT_THROW(read_pgm(truncated), IoError);
  EXPECT_THROW(read_pgm(fs::path("/nonexistent/file.pgm")), IoError);
}

TEST(FloatDump, RoundTripIsBitExact) {
  Raster img = oracle::random_raster(5, 9, 4, -1e6, 1e6);
  img(0, 0) = -0.0;
  img(1, 1) = 1e-310;
  const auto path = temp_path("rt.nltvf");
  write_float_dump(path, img);
  const Raster back = read_float_dump(path);
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t k = 0; k < img.size(); ++k)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k]), std::bit_cast<std::uint64_t>(img[k]));
}

TEST(FloatDump, LayoutIsLittleEndianWithMagic) {
  std::stringstream ss;
  write_float_dump(ss, Raster(1, 2, std::vector<double>{1.0, -2.0}));
  const std::string b = ss.str();
  ASSERT_EQ(b.size(), 6u + 8u + 16u);
  EXPECT_EQ(b.substr(0, 6), "NLTVF1");
  EXPECT_EQ(static_cast<unsigned char>(b[6]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[10]), 2);
  // 1.0 = 0x3FF0000000000000 little-endian: last byte 0x3F.
  EXPECT_EQ(static_cast<unsigned char>(b[14 + 7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(b[14 + 8 + 7]), 0xC0);
}

TEST(FloatDump, TwoPlanesAndCorruption) {
  const Raster re = oracle::random_raster(4, 4, 1), im = oracle::random_raster(4, 4, 2);
  const auto path = temp_path("planes.nltvf");
  const std::vector<Raster> planes{re, im};
  write_float_dump(path, std::span<const Raster>(planes));
  const auto back = read_float_dump_planes(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], re);
  EXPECT_EQ(back[1], im);
  EXPECT_THROW(parse_float_dump("NLTVF2xxxxxxxx"), IoError);
  std::stringstream ss;
  write_float_dump(ss, re);
  EXPECT_THROW(parse_float_dump(ss.str().substr(0, 30)), IoError);
}

TEST(Png, RoundTripIsExact) {
  const Raster img = byte_image(21, 34, 8);
  const auto path = temp_path("rt.png");
  write_image(path, img);
  EXPECT_EQ(read_image(path), img);
}

TEST(Quantization, ErrorBoundedByHalfStep) {
  const Raster img = oracle::random_raster(64, 64, 3, 0.0, 255.0);
  const Raster q = quantized(img);
  double worst = 0.0;
  for (std::size_t k = 0; k < img.size(); ++k) worst = std::max(worst, std::abs(q[k] - img[k]));
  EXPECT_LE(worst, 0.5);
  EXPECT_NEAR(mse(img, q), 1.0 / 12.0, 0.01);
}
