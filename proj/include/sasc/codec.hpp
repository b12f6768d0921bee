#pragma once

// Raster encode/decode backed by libpng, libjpeg and libtiff.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sasc/image.hpp"

namespace sasc {

using Bytes = std::vector<std::uint8_t>;

// In-memory encoders used by the compression metric and the image endpoint.
// Failures throw MetricUnavailable.
Bytes encode_png_rgb(const RgbImage& img);
Bytes encode_png_gray8(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& pixels);
Bytes encode_jpeg_rgb(const RgbImage& img, int quality);
RgbImage decode_jpeg_rgb(const Bytes& jpeg);

// Single-channel rasters on disk. PNG (8/16-bit grayscale) and TIFF
// (8/16-bit unsigned or 32-bit float, one sample per pixel) are accepted;
// the format is picked from the extension. Decode failures throw DataError.
Image2D read_raster(const std::filesystem::path& path);

void write_tiff_float32(const std::filesystem::path& path, const Image2D& img);
// Values are clamped to [0, 65535] and rounded.
void write_png_gray16(const std::filesystem::path& path, const Image2D& img);

}  // namespace sasc
