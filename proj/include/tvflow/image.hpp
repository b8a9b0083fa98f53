#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tvflow/errors.hpp"

namespace tvflow {

// Row-major, channel-interleaved raster; samples hold [0, 2^bit_depth - 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1, 3 or 4
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> data;

  std::uint16_t max_value() const { return bit_depth == 16 ? 65535 : 255; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Dispatches on extension (.png, .ppm, .pgm). Throws UnsupportedFormat.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);

}  // namespace tvflow
