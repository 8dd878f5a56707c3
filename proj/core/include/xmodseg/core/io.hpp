#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xmodseg/core/image.hpp"

namespace xmodseg {

// 16-bit grayscale PNG, the on-disk raster format for dataset images.
// Real intensities are mapped linearly onto [0, 65535] with the rescale
// window (lo, hi) recorded in the dataset manifest.
struct Rescale {
  double lo = 0.0;
  double hi = 1.0;
};

void write_png16(const std::filesystem::path& path, const Grid2d<std::uint16_t>& img);
Grid2d<std::uint16_t> read_png16(const std::filesystem::path& path);

// 8-bit grayscale PNG for binary masks (0 / 255).
void write_png8(const std::filesystem::path& path, const Grid2d<std::uint8_t>& img);
Grid2d<std::uint8_t> read_png8(const std::filesystem::path& path);

// 8-bit RGB PNG for rendered plots.
struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
};
void write_png_rgb8(const std::filesystem::path& path, int rows, int cols,
                    const std::vector<Rgb8>& pixels);

// Quantize/dequantize between real images and the 16-bit raster.
Grid2d<std::uint16_t> quantize16(const Image2d& img, const Rescale& rescale);
Image2d dequantize16(const Grid2d<std::uint16_t>& img, const Rescale& rescale);
Rescale rescale_of(const Image2d& img);

void write_image16(const std::filesystem::path& path, const Image2d& img,
                   const Rescale& rescale);
Image2d read_image16(const std::filesystem::path& path, const Rescale& rescale);

void write_mask(const std::filesystem::path& path, const Mask2d& mask);
Mask2d read_mask(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace xmodseg
