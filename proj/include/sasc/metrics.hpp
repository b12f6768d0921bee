#pragma once

// Image-complexity metrics computed from a single intensity chip.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sasc/image.hpp"

namespace sasc {

enum class Colormap { Grayscale, Jet, Hot };

std::string_view to_string(Colormap c);
Colormap parse_colormap(std::string_view s);

struct MetricConfig {
  double drc_epsilon = 1e-10;
  double lacunarity_box_m = 0.5;
  double sobel_kernel_m = 1.5;
  int entropy_bins = 64;
  int median_kernel_px = 15;
  int jpeg_quality = 75;
  Colormap colormap = Colormap::Grayscale;

  void validate() const;
};

// (v - min) / (max - min); a constant image maps to all zeros.
Image2D normalize_unit(const Image2D& img);

// 20 log10(v + epsilon), in dB. Expects values already in [0, 1].
Image2D dynamic_range_compress(const Image2D& img, double epsilon = 1e-10);

// Summed-area tables of the values and of their squares, padded with a zero
// first row and column so box sums need no edge cases.
class IntegralImage {
 public:
  explicit IntegralImage(const Image2D& img);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  // Sum over the inclusive rectangle [0..row] x [0..col].
  double at(std::size_t row, std::size_t col) const { return sum_[(row + 1) * stride_ + col + 1]; }

  // Sum over the box with top-left (row, col) and the given extent.
  double box_sum(std::size_t row, std::size_t col, std::size_t box_h, std::size_t box_w) const {
    return corner_sum(sum_, row, col, box_h, box_w);
  }
  double box_sum_squares(std::size_t row, std::size_t col, std::size_t box_h, std::size_t box_w) const {
    return corner_sum(sq_, row, col, box_h, box_w);
  }

 private:
  double corner_sum(const std::vector<double>& t, std::size_t row, std::size_t col, std::size_t h,
                    std::size_t w) const {
    const std::size_t r1 = row + h, c1 = col + w;
    return t[r1 * stride_ + c1] - t[row * stride_ + c1] - t[r1 * stride_ + col] + t[row * stride_ + col];
  }

  std::size_t width_;
  std::size_t height_;
  std::size_t stride_;
  std::vector<double> sum_;
  std::vector<double> sq_;
};

inline IntegralImage integral_image(const Image2D& img) { return IntegralImage(img); }

// Gliding-box lacunarity E[M^2] / E[M]^2 of box masses M at unit stride.
double lacunarity_px(const Image2D& img, std::size_t box_px);
double lacunarity(const Image2D& img, double box_m);

// Kernel size in pixels for a physical size: rounded, bumped to odd, at least 3.
std::size_t sobel_kernel_px(double kernel_m, double meters_per_pixel);

struct SobelKernel {
  std::vector<double> smoothing;   // binomial, sums to 1
  std::vector<double> derivative;  // antisymmetric, positive taps sum to 1
};

SobelKernel make_sobel_kernel(std::size_t k);

struct GradientImages {
  Image2D gx;  // horizontal derivative
  Image2D gy;  // vertical derivative
};

// Valid-interior responses of the size-k separable kernel: (h-k+1) x (w-k+1).
GradientImages sobel_responses(const Image2D& img, std::size_t k);

// Mean gradient magnitude over the valid interior.
double edge_intensity_px(const Image2D& img, std::size_t k);
double edge_intensity(const Image2D& img, double kernel_m);

// (H(X,Y) - I(X;Y)) / (2 log2 bins) over horizontally and vertically
// adjacent pixel pairs, in [0, 1].
double structural_entropy(const Image2D& img, int bins);

// k x k median with symmetric (edge-repeating) reflection at the borders.
Image2D median_filter(const Image2D& img, int kernel_px);

// Maps values (min-max normalized first) through a palette to 8-bit RGB.
RgbImage colorize(const Image2D& img, Colormap colormap);

struct CompressionResult {
  double ratio = 0.0;       // lossy bytes / lossless bytes
  double ratio_rmse = 0.0;  // ratio / max(rmse, 1e-6)
  double rmse = 0.0;        // decoded lossy vs source RGB, [0, 255] units
  std::size_t lossy_bytes = 0;
  std::size_t lossless_bytes = 0;
};

CompressionResult compression_ratio(const Image2D& img, const MetricConfig& cfg);

struct MetricFailure {
  std::string field;
  std::string reason;  // UNDEFINED_LACUNARITY, INVALID_ARGUMENT, METRIC_UNAVAILABLE
  std::string detail;

  bool operator==(const MetricFailure&) const = default;
};

struct MetricVector {
  std::optional<double> lacunarity;
  std::optional<double> edge_intensity;
  std::optional<double> entropy;
  std::optional<double> compression_ratio;
  std::optional<double> compression_ratio_rmse;
  std::vector<MetricFailure> failures;

  bool operator==(const MetricVector&) const = default;
};

// Lacunarity runs on normalized linear intensity; the other metrics run on
// the DRC (dB) image. Sub-metric errors become entries in `failures`.
MetricVector compute_metric_vector(const Image2D& img, const MetricConfig& cfg);

}  // namespace sasc
