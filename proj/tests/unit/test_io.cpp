#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sonarfuse/error.hpp"
#include "sonarfuse/image_io.hpp"
#include "test_support.hpp"

namespace sonarfuse::io {
namespace {

using sonarfuse::testing::random_mask;
using sonarfuse::testing::random_raster;
using sonarfuse::testing::read_file;
using sonarfuse::testing::TempDir;

Raster quantized(const Raster& img) {
  Raster q = img;
  for (double& v : q.data()) v = to_byte(v) / 255.0;
  return q;
}

TEST(ToByte, ClampsAndRounds) {
  EXPECT_EQ(to_byte(-0.3), 0);
  EXPECT_EQ(to_byte(1.7), 255);
  EXPECT_EQ(to_byte(0.5), 128);  // 127.5 rounds up
  EXPECT_EQ(to_byte(1.0 / 255.0), 1);
  EXPECT_EQ(to_byte(std::nan("")), 0);
}

TEST(ImageIo, RoundTripsEveryFormat) {
  TempDir dir("io");
  const std::pair<const char*, std::size_t> cases[] = {{"g.png", 1}, {"c.png", 3}, {"g.pgm", 1}, {"c.ppm", 3}};
  for (const auto& [name, channels] : cases) {
    const Raster img = random_raster(9, 13, channels, channels);
    write_image(dir / name, img);
    const Raster back = read_image(dir / name);
    ASSERT_TRUE(back.same_shape(img)) << name;
    EXPECT_EQ(back, quantized(img)) << name;
  }
}

TEST(ImageIo, WritesAreByteStable) {
  TempDir dir("io_stable");
  const Raster img = random_raster(8, 8, 3, 4);
  write_image(dir / "a.png", img);
  write_image(dir / "b.png", img);
  EXPECT_EQ(read_file(dir / "a.png"), read_file(dir / "b.png"));
}

TEST(ImageIo, MaskRoundTrip) {
  TempDir dir("io_mask");
  const BinaryMask m = random_mask(10, 7, 0.4, 2);
  write_mask(dir / "m.png", m);
  EXPECT_EQ(read_mask(dir / "m.png"), m);
  const RegionMask soft = read_region_mask(dir / "m.png");
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 7; ++x) EXPECT_EQ(soft.at(y, x), m.at(y, x) ? 1.0 : 0.0);
}

TEST(ImageIo, ErrorsAreIoErrors) {
  TempDir dir("io_err");
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
  {
    std::ofstream f(dir / "junk.png", std::ios::binary);
    f << "not a png";
  }
  EXPECT_THROW(read_image(dir / "junk.png"), IoError);
  EXPECT_THROW(write_image(dir / "x.bmp", Raster(2, 2, 1)), IoError);
  EXPECT_THROW(write_image(dir / "x.pgm", Raster(2, 2, 3)), DomainError);
}

TEST(TextIo, AtomicWriteCreatesParentsAndReplaces) {
  TempDir dir("io_text");
  const auto p = dir / "nested" / "deeper" / "t.txt";
  write_text_atomic(p, "one");
  write_text_atomic(p, "two");
  EXPECT_EQ(read_text(p), "two");
  EXPECT_THROW(read_text(dir / "none.txt"), IoError);
}

}  // namespace
}  // namespace sonarfuse::io
