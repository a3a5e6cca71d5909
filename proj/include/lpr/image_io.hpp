#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "lpr/field.hpp"

namespace lpr {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// LPRF raw stacks: 16-byte header ("LPRF", u32 height, u32 width,
// u32 plane count, all little-endian) followed by plane-major float32 LE
// samples. A complex field is stored as two consecutive planes (re, im).

struct LprfHeader {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t planes = 0;
};

void write_lprf(const std::filesystem::path& path, const std::vector<RealImage>& planes);
std::vector<RealImage> read_lprf(const std::filesystem::path& path);
LprfHeader read_lprf_header(const std::filesystem::path& path);

void write_lprf_complex(const std::filesystem::path& path, const ComplexField& f);
ComplexField read_lprf_complex(const std::filesystem::path& path);

/// Grayscale or color PNG of any bit depth; samples scaled to [0, 1].
/// Color images are returned channelwise (R, G, B); alpha is dropped.
std::vector<RealImage> read_png_channels(const std::filesystem::path& path);
/// Reads a PNG and averages channels if it is not grayscale.
RealImage read_png_gray(const std::filesystem::path& path);

/// Writes a grayscale PNG. Values are mapped linearly from [lo, hi] to the
/// full integer range and clamped. bit_depth is 8 or 16.
void write_png_gray(const std::filesystem::path& path, const RealImage& img, double lo,
                    double hi, int bit_depth = 8);
/// Same, with lo/hi taken from the image's own range.
void write_png_gray_autoscale(const std::filesystem::path& path, const RealImage& img,
                              int bit_depth = 8);

}  // namespace lpr
