#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sasc {

// Single-channel raster, row-major. meters_per_pixel carries the physical
// scale used to turn kernel sizes in meters into pixels.
class Image2D {
 public:
  Image2D() = default;
  Image2D(std::size_t width, std::size_t height, double meters_per_pixel = 1.0, double fill = 0.0);
  Image2D(std::size_t width, std::size_t height, std::vector<double> values, double meters_per_pixel = 1.0);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double meters_per_pixel() const { return mpp_; }
  void set_meters_per_pixel(double mpp);

  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min() const;
  double max() const;

  Image2D transposed() const;
  Image2D rotated180() const;

  bool operator==(const Image2D&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double mpp_ = 1.0;
  std::vector<double> values_;
};

// 8-bit interleaved RGB raster.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3
};

}  // namespace sasc
