#include "dsf_doctest.hpp"

#include "dsfusion/png_io.hpp"
#include "test_helpers.hpp"

#include <random>

using namespace dsfusion::png_io;

TEST_SUITE_BEGIN("png_io");

TEST_CASE("rgb8 round trip is lossless") {
  const auto dir = testutil::scratch_dir("png_rgb");
  std::mt19937_64 rng(3);
  ImageU8 img;
  img.width = 17;
  img.height = 9;
  img.channels = 3;
  img.pixels.resize(17 * 9 * 3);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng() & 0xFF);

  write_rgb8(dir + "/a.png", img);
  const auto back = read_rgb8(dir + "/a.png");
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("gray16 round trip is lossless, full range") {
  const auto dir = testutil::scratch_dir("png_gray16");
  std::mt19937_64 rng(4);
  ImageU16 img;
  img.width = 13;
  img.height = 21;
  img.pixels.resize(13 * 21);
  for (auto& p : img.pixels) p = static_cast<uint16_t>(rng() & 0xFFFF);
  img.pixels[0] = 0;
  img.pixels[1] = 65535;

  write_gray16(dir + "/d.png", img);
  const auto back = read_gray16(dir + "/d.png");
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("paletted mask keeps raw indices") {
  const auto dir = testutil::scratch_dir("png_idx");
  const Palette palette{{0, 0, 0}, {255, 255, 255}, {230, 25, 75}};
  std::vector<uint8_t> ids(8 * 6);
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<uint8_t>(i % 3);

  write_indexed8(dir + "/m.png", 8, 6, ids, palette);
  const auto back = read_mask(dir + "/m.png");
  CHECK(back.width == 8);
  CHECK(back.height == 6);
  CHECK(back.pixels == ids);
}

TEST_CASE("reader errors are descriptive") {
  const auto dir = testutil::scratch_dir("png_err");
  CHECK_THROWS_WITH_AS(read_rgb8(dir + "/missing.png"),
                       doctest::Contains("missing.png"), std::runtime_error);

  // A 16-bit reader must reject an 8-bit RGB file.
  ImageU8 img;
  img.width = img.height = 4;
  img.channels = 3;
  img.pixels.assign(4 * 4 * 3, 10);
  write_rgb8(dir + "/rgb.png", img);
  CHECK_THROWS_AS(read_gray16(dir + "/rgb.png"), std::runtime_error);
}

TEST_SUITE_END();
