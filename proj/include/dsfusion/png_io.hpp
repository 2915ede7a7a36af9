#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dsfusion::png_io {

/// Interleaved 8-bit image, `channels` in {1, 3}.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;  // row-major, interleaved
};

/// Single-channel 16-bit image (host byte order).
struct ImageU16 {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> pixels;
};

using Palette = std::vector<std::array<uint8_t, 3>>;

void write_rgb8(const std::string& path, const ImageU8& image);
void write_gray16(const std::string& path, const ImageU16& image);

/// 8-bit paletted PNG; `indices` are palette entries, one byte per pixel.
void write_indexed8(const std::string& path, int width, int height,
                    const std::vector<uint8_t>& indices, const Palette& palette);

/// Reads any PNG color type, expanded to 8-bit RGB.
ImageU8 read_rgb8(const std::string& path);

/// Reads a 16-bit grayscale PNG; rejects other layouts.
ImageU16 read_gray16(const std::string& path);

/// Reads a class-id mask: paletted PNGs yield raw palette indices,
/// 8-bit grayscale PNGs yield pixel values.
ImageU8 read_mask(const std::string& path);

}  // namespace dsfusion::png_io
