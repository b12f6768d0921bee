#include "sasc/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sasc/errors.hpp"

namespace sasc {

Image2D::Image2D(std::size_t width, std::size_t height, double meters_per_pixel, double fill)
    : Image2D(width, height, std::vector<double>(width * height, fill), meters_per_pixel) {}

Image2D::Image2D(std::size_t width, std::size_t height, std::vector<double> values, double meters_per_pixel)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be at least 1x1");
  if (values_.size() != width * height) {
    throw InvalidArgument("image buffer holds " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(width * height));
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("image values must be finite");
  }
  set_meters_per_pixel(meters_per_pixel);
}

void Image2D::set_meters_per_pixel(double mpp) {
  if (!(mpp > 0.0) || !std::isfinite(mpp)) throw InvalidArgument("meters_per_pixel must be positive");
  mpp_ = mpp;
}

double Image2D::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Image2D::max() const { return *std::max_element(values_.begin(), values_.end()); }

Image2D Image2D::transposed() const {
  Image2D out(height_, width_, mpp_);
  for (std::size_t r = 0; r < height_; ++r)
    for (std::size_t c = 0; c < width_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

Image2D Image2D::rotated180() const {
  Image2D out = *this;
  std::reverse(out.values_.begin(), out.values_.end());
  return out;
}

}  // namespace sasc
