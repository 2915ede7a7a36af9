#include "dsfusion/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace dsfusion::png_io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr fp(std::fopen(path.c_str(), mode));
  if (!fp) throw std::runtime_error("png: cannot open '" + path + "'");
  return fp;
}

[[noreturn]] void fail(const std::string& path, const char* what) {
  throw std::runtime_error("png: " + std::string(what) + " ('" + path + "')");
}

struct WriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

struct ReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

WriteCtx make_writer() {
  WriteCtx ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) throw std::runtime_error("png: allocation failure");
  return ctx;
}

ReadCtx make_reader() {
  ReadCtx ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) throw std::runtime_error("png: allocation failure");
  return ctx;
}

}  // namespace

void write_rgb8(const std::string& path, const ImageU8& image) {
  if (image.channels != 3 || image.pixels.size() !=
      static_cast<size_t>(image.width) * image.height * 3)
    throw std::invalid_argument("png: write_rgb8 expects interleaved 3-channel data");
  auto fp = open_file(path, "wb");
  auto ctx = make_writer();
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = const_cast<png_bytep>(image.pixels.data() + static_cast<size_t>(y) * image.width * 3);

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "write error");
  png_init_io(ctx.png, fp.get());
  png_set_IHDR(ctx.png, ctx.info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

void write_gray16(const std::string& path, const ImageU16& image) {
  if (image.pixels.size() != static_cast<size_t>(image.width) * image.height)
    throw std::invalid_argument("png: write_gray16 size mismatch");
  auto fp = open_file(path, "wb");
  auto ctx = make_writer();
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<uint16_t*>(image.pixels.data() + static_cast<size_t>(y) * image.width));

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "write error");
  png_init_io(ctx.png, fp.get());
  png_set_IHDR(ctx.png, ctx.info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  png_set_swap(ctx.png);  // host little-endian -> PNG big-endian
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

void write_indexed8(const std::string& path, int width, int height,
                    const std::vector<uint8_t>& indices, const Palette& palette) {
  if (indices.size() != static_cast<size_t>(width) * height)
    throw std::invalid_argument("png: write_indexed8 size mismatch");
  if (palette.empty() || palette.size() > 256)
    throw std::invalid_argument("png: palette must hold 1..256 entries");
  auto fp = open_file(path, "wb");
  auto ctx = make_writer();
  std::vector<png_color> colors(palette.size());
  for (size_t i = 0; i < palette.size(); ++i)
    colors[i] = png_color{palette[i][0], palette[i][1], palette[i][2]};
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(indices.data() + static_cast<size_t>(y) * width);

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "write error");
  png_init_io(ctx.png, fp.get());
  png_set_IHDR(ctx.png, ctx.info, width, height, 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(ctx.png, ctx.info, colors.data(), static_cast<int>(colors.size()));
  png_write_info(ctx.png, ctx.info);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

ImageU8 read_rgb8(const std::string& path) {
  auto fp = open_file(path, "rb");
  auto ctx = make_reader();
  ImageU8 image;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "read error");
  png_init_io(ctx.png, fp.get());
  png_read_info(ctx.png, ctx.info);
  image.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  image.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  image.channels = 3;

  // Normalize every color layout to 8-bit RGB.
  const auto color_type = png_get_color_type(ctx.png, ctx.info);
  const auto bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
  if (bit_depth == 16) png_set_strip_16(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  image.pixels.resize(static_cast<size_t>(image.width) * image.height * 3);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = image.pixels.data() + static_cast<size_t>(y) * image.width * 3;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return image;
}

ImageU16 read_gray16(const std::string& path) {
  auto fp = open_file(path, "rb");
  auto ctx = make_reader();
  ImageU16 image;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "read error");
  png_init_io(ctx.png, fp.get());
  png_read_info(ctx.png, ctx.info);
  if (png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(ctx.png, ctx.info) != 16)
    fail(path, "expected 16-bit grayscale");
  image.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  image.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  png_set_swap(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  image.pixels.resize(static_cast<size_t>(image.width) * image.height);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(image.pixels.data() + static_cast<size_t>(y) * image.width);
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return image;
}

ImageU8 read_mask(const std::string& path) {
  auto fp = open_file(path, "rb");
  auto ctx = make_reader();
  ImageU8 image;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "read error");
  png_init_io(ctx.png, fp.get());
  png_read_info(ctx.png, ctx.info);
  const auto color_type = png_get_color_type(ctx.png, ctx.info);
  const auto bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY)
    fail(path, "mask must be paletted or grayscale");
  if (bit_depth < 8) png_set_packing(ctx.png);  // widen 1/2/4-bit indices to bytes
  if (bit_depth == 16) fail(path, "mask must be 8-bit");
  png_read_update_info(ctx.png, ctx.info);

  image.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  image.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  image.channels = 1;
  image.pixels.resize(static_cast<size_t>(image.width) * image.height);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = image.pixels.data() + static_cast<size_t>(y) * image.width;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return image;
}

}  // namespace dsfusion::png_io
