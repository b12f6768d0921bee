#include "sasc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sasc/codec.hpp"
#include "sasc/errors.hpp"

namespace sasc {

namespace {

std::size_t pixels_for(double meters, double mpp) {
  if (!(meters > 0.0) || !std::isfinite(meters)) throw InvalidArgument("kernel size must be positive");
  return static_cast<std::size_t>(std::llround(meters / mpp));
}

// Binomial coefficients of the given order, as doubles.
std::vector<double> binomial_row(std::size_t order) {
  std::vector<double> row{1.0};
  for (std::size_t n = 0; n < order; ++n) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      next[i] += row[i];
      next[i + 1] += row[i];
    }
    row = std::move(next);
  }
  return row;
}

// Correlates every row with `taps`, keeping only fully covered positions.
bool antisymmetric(const std::vector<double>& taps) {
  for (std::size_t j = 0; j < taps.size(); ++j) {
    if (taps[j] != -taps[taps.size() - 1 - j]) return false;
  }
  return true;
}

// Antisymmetric taps are applied to paired differences so that a constant
// neighbourhood yields exactly zero.
template <typename At>
double apply_taps(const std::vector<double>& taps, bool anti, At at) {
  const std::size_t k = taps.size();
  double acc = 0.0;
  if (anti) {
    for (std::size_t j = 0; j < k / 2; ++j) acc += taps[k - 1 - j] * (at(k - 1 - j) - at(j));
  } else {
    for (std::size_t j = 0; j < k; ++j) acc += taps[j] * at(j);
  }
  return acc;
}

Image2D correlate_rows(const Image2D& img, const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const bool anti = antisymmetric(taps);
  const std::size_t out_w = img.width() - k + 1;
  Image2D out(out_w, img.height(), img.meters_per_pixel());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      out(r, c) = apply_taps(taps, anti, [&](std::size_t j) { return img(r, c + j); });
    }
  }
  return out;
}

Image2D correlate_cols(const Image2D& img, const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const bool anti = antisymmetric(taps);
  const std::size_t out_h = img.height() - k + 1;
  Image2D out(img.width(), out_h, img.meters_per_pixel());
  for (std::size_t r = 0; r < out_h; ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      out(r, c) = apply_taps(taps, anti, [&](std::size_t i) { return img(r + i, c); });
    }
  }
  return out;
}

double entropy_bits(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (const double n : counts) {
    if (n > 0.0) {
      const double p = n / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i - 1;
  if (i >= len) i = 2 * len - i - 1;
  return static_cast<std::size_t>(i);
}

std::array<std::uint8_t, 3> palette(double t, Colormap colormap) {
  auto to8 = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  switch (colormap) {
    case Colormap::Grayscale:
      return {to8(t), to8(t), to8(t)};
    case Colormap::Jet:
      return {to8(1.5 - std::abs(4.0 * t - 3.0)), to8(1.5 - std::abs(4.0 * t - 2.0)),
              to8(1.5 - std::abs(4.0 * t - 1.0))};
    case Colormap::Hot:
      return {to8(3.0 * t), to8(3.0 * t - 1.0), to8(3.0 * t - 2.0)};
  }
  return {0, 0, 0};
}

}  // namespace

std::string_view to_string(Colormap c) {
  switch (c) {
    case Colormap::Grayscale:
      return "grayscale";
    case Colormap::Jet:
      return "jet";
    case Colormap::Hot:
      return "hot";
  }
  return "grayscale";
}

Colormap parse_colormap(std::string_view s) {
  if (s == "grayscale") return Colormap::Grayscale;
  if (s == "jet") return Colormap::Jet;
  if (s == "hot") return Colormap::Hot;
  throw InvalidArgument("unknown colormap '" + std::string(s) + "' (expected grayscale, jet or hot)");
}

void MetricConfig::validate() const {
  if (!(drc_epsilon > 0.0)) throw InvalidArgument("drc_epsilon must be positive");
  if (!(lacunarity_box_m > 0.0)) throw InvalidArgument("lacunarity_box_m must be positive");
  if (!(sobel_kernel_m > 0.0)) throw InvalidArgument("sobel_kernel_m must be positive");
  if (entropy_bins < 2) throw InvalidArgument("entropy_bins must be at least 2");
  if (median_kernel_px < 1 || median_kernel_px % 2 == 0) throw InvalidArgument("median_kernel_px must be odd");
  if (jpeg_quality < 1 || jpeg_quality > 100) throw InvalidArgument("jpeg_quality must lie in 1..100");
}

Image2D normalize_unit(const Image2D& img) {
  Image2D out = img;
  const double lo = img.min();
  const double range = img.max() - lo;
  for (double& v : out.values()) v = range > 0.0 ? (v - lo) / range : 0.0;
  return out;
}

Image2D dynamic_range_compress(const Image2D& img, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("DRC epsilon must be positive");
  Image2D out = img;
  for (double& v : out.values()) {
    if (v < 0.0) throw InvalidArgument("DRC input must be non-negative; normalize first");
    v = 20.0 * std::log10(v + epsilon);
  }
  return out;
}

IntegralImage::IntegralImage(const Image2D& img)
    : width_(img.width()),
      height_(img.height()),
      stride_(img.width() + 1),
      sum_((img.height() + 1) * (img.width() + 1), 0.0),
      sq_(sum_.size(), 0.0) {
  for (std::size_t r = 0; r < height_; ++r) {
    double row_sum = 0.0, row_sq = 0.0;
    for (std::size_t c = 0; c < width_; ++c) {
      const double v = img(r, c);
      row_sum += v;
      row_sq += v * v;
      sum_[(r + 1) * stride_ + c + 1] = sum_[r * stride_ + c + 1] + row_sum;
      sq_[(r + 1) * stride_ + c + 1] = sq_[r * stride_ + c + 1] + row_sq;
    }
  }
}

double lacunarity_px(const Image2D& img, std::size_t box_px) {
  if (box_px < 1 || box_px > std::min(img.width(), img.height())) {
    throw InvalidArgument("lacunarity box of " + std::to_string(box_px) + " px does not fit a " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  }
  if (img.min() < 0.0) throw InvalidArgument("lacunarity needs non-negative box masses");
  if (!(img.max() > 0.0)) throw UndefinedLacunarity("lacunarity is undefined for an all-zero image");

  const IntegralImage table(img);
  const std::size_t rows = img.height() - box_px + 1;
  const std::size_t cols = img.width() - box_px + 1;
  const double count = static_cast<double>(rows * cols);

  // Two passes, 1 + Var(M) / E[M]^2: equal to E[M^2]/E[M]^2 but never below
  // one, and exactly one for constant images.
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) total += table.box_sum(r, c, box_px, box_px);
  const double mean = total / count;
  double ss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = table.box_sum(r, c, box_px, box_px) - mean;
      ss += d * d;
    }
  }
  return 1.0 + (ss / count) / (mean * mean);
}

double lacunarity(const Image2D& img, double box_m) {
  return lacunarity_px(img, pixels_for(box_m, img.meters_per_pixel()));
}

std::size_t sobel_kernel_px(double kernel_m, double meters_per_pixel) {
  std::size_t k = pixels_for(kernel_m, meters_per_pixel);
  if (k % 2 == 0) ++k;
  return std::max<std::size_t>(k, 3);
}

SobelKernel make_sobel_kernel(std::size_t k) {
  if (k < 3 || k % 2 == 0) throw InvalidArgument("Sobel kernel size must be odd and at least 3");
  SobelKernel kernel;
  kernel.smoothing = binomial_row(k - 1);
  double s = 0.0;
  for (const double v : kernel.smoothing) s += v;
  for (double& v : kernel.smoothing) v /= s;

  // Binomial of order k-3 correlated with the central difference [-1, 0, 1].
  const auto base = binomial_row(k - 3);
  kernel.derivative.assign(k, 0.0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    kernel.derivative[i] -= base[i];
    kernel.derivative[i + 2] += base[i];
  }
  double positive = 0.0;
  for (const double v : kernel.derivative) positive += std::max(v, 0.0);
  for (double& v : kernel.derivative) v /= positive;
  return kernel;
}

GradientImages sobel_responses(const Image2D& img, std::size_t k) {
  if (k > std::min(img.width(), img.height())) {
    throw InvalidArgument("Sobel kernel of " + std::to_string(k) + " px exceeds the " + std::to_string(img.width()) +
                          "x" + std::to_string(img.height()) + " image");
  }
  const auto kernel = make_sobel_kernel(k);
  return {correlate_cols(correlate_rows(img, kernel.derivative), kernel.smoothing),
          correlate_cols(correlate_rows(img, kernel.smoothing), kernel.derivative)};
}

double edge_intensity_px(const Image2D& img, std::size_t k) {
  const auto g = sobel_responses(img, k);
  const auto gx = g.gx.values();
  const auto gy = g.gy.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) sum += std::hypot(gx[i], gy[i]);
  return sum / static_cast<double>(gx.size());
}

double edge_intensity(const Image2D& img, double kernel_m) {
  return edge_intensity_px(img, sobel_kernel_px(kernel_m, img.meters_per_pixel()));
}

double structural_entropy(const Image2D& img, int bins) {
  if (bins < 2) throw InvalidArgument("entropy needs at least 2 bins");
  if (img.width() < 2 || img.height() < 2) throw InvalidArgument("entropy needs at least 2x2 pixels");

  const Image2D norm = normalize_unit(img);
  const auto nb = static_cast<std::size_t>(bins);
  std::vector<std::size_t> level(norm.size());
  const auto values = norm.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    level[i] = std::min(static_cast<std::size_t>(values[i] * static_cast<double>(bins)), nb - 1);
  }

  std::vector<double> joint(nb * nb, 0.0), first(nb, 0.0), second(nb, 0.0);
  auto add = [&](std::size_t a, std::size_t b) {
    joint[a * nb + b] += 1.0;
    first[a] += 1.0;
    second[b] += 1.0;
  };
  const std::size_t w = norm.width(), h = norm.height();
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c + 1 < w; ++c) add(level[r * w + c], level[r * w + c + 1]);
  for (std::size_t r = 0; r + 1 < h; ++r)
    for (std::size_t c = 0; c < w; ++c) add(level[r * w + c], level[(r + 1) * w + c]);

  const double pairs = static_cast<double>(h * (w - 1) + (h - 1) * w);
  const double h_joint = entropy_bits(joint, pairs);
  const double mutual = entropy_bits(first, pairs) + entropy_bits(second, pairs) - h_joint;
  const double gamma = (h_joint - mutual) / (2.0 * std::log2(static_cast<double>(bins)));
  return std::clamp(gamma, 0.0, 1.0);
}

Image2D median_filter(const Image2D& img, int kernel_px) {
  if (kernel_px < 1 || kernel_px % 2 == 0) throw InvalidArgument("median kernel must be odd");
  const auto k = static_cast<std::size_t>(kernel_px);
  if (k > std::min(img.width(), img.height())) throw InvalidArgument("median kernel exceeds the image");

  const auto radius = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t w = img.width(), h = img.height();
  Image2D out(w, h, img.meters_per_pixel());
  std::vector<double> window(k * k);
  const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      std::size_t n = 0;
      for (std::ptrdiff_t dr = -radius; dr <= radius; ++dr) {
        const std::size_t rr = reflect(static_cast<std::ptrdiff_t>(r) + dr, h);
        for (std::ptrdiff_t dc = -radius; dc <= radius; ++dc) {
          window[n++] = img(rr, reflect(static_cast<std::ptrdiff_t>(c) + dc, w));
        }
      }
      std::nth_element(window.begin(), mid, window.end());
      out(r, c) = *mid;
    }
  }
  return out;
}

RgbImage colorize(const Image2D& img, Colormap colormap) {
  const Image2D norm = normalize_unit(img);
  RgbImage out{img.width(), img.height(), std::vector<std::uint8_t>(img.size() * 3)};
  const auto values = norm.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto rgb = palette(values[i], colormap);
    std::copy(rgb.begin(), rgb.end(), out.data.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return out;
}

CompressionResult compression_ratio(const Image2D& img, const MetricConfig& cfg) {
  cfg.validate();
  const Image2D filtered = median_filter(img, cfg.median_kernel_px);
  const RgbImage rgb = colorize(filtered, cfg.colormap);

  const auto lossless = encode_png_rgb(rgb);
  const auto lossy = encode_jpeg_rgb(rgb, cfg.jpeg_quality);
  const RgbImage decoded = decode_jpeg_rgb(lossy);
  if (decoded.width != rgb.width || decoded.height != rgb.height) {
    throw MetricUnavailable("JPEG round trip changed the image dimensions");
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < rgb.data.size(); ++i) {
    const double d = static_cast<double>(decoded.data[i]) - static_cast<double>(rgb.data[i]);
    ss += d * d;
  }
  CompressionResult result;
  result.lossy_bytes = lossy.size();
  result.lossless_bytes = lossless.size();
  result.rmse = std::sqrt(ss / static_cast<double>(rgb.data.size()));
  result.ratio = static_cast<double>(lossy.size()) / static_cast<double>(lossless.size());
  result.ratio_rmse = result.ratio / std::max(result.rmse, 1e-6);
  return result;
}

MetricVector compute_metric_vector(const Image2D& img, const MetricConfig& cfg) {
  cfg.validate();
  MetricVector mv;
  auto attempt = [&](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const UndefinedLacunarity& e) {
      mv.failures.push_back({field, "UNDEFINED_LACUNARITY", e.what()});
    } catch (const MetricUnavailable& e) {
      mv.failures.push_back({field, "METRIC_UNAVAILABLE", e.what()});
    } catch (const InvalidArgument& e) {
      mv.failures.push_back({field, "INVALID_ARGUMENT", e.what()});
    }
  };

  const Image2D norm = normalize_unit(img);
  const Image2D drc = dynamic_range_compress(norm, cfg.drc_epsilon);

  attempt("lacunarity", [&] { mv.lacunarity = lacunarity(norm, cfg.lacunarity_box_m); });
  attempt("edge_intensity", [&] { mv.edge_intensity = edge_intensity(drc, cfg.sobel_kernel_m); });
  attempt("entropy", [&] { mv.entropy = structural_entropy(drc, cfg.entropy_bins); });
  attempt("compression_ratio", [&] {
    const auto cr = compression_ratio(drc, cfg);
    mv.compression_ratio = cr.ratio;
    mv.compression_ratio_rmse = cr.ratio_rmse;
  });
  return mv;
}

}  // namespace sasc
