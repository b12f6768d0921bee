#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sasc/codec.hpp"
#include "sasc/errors.hpp"
#include "sasc/metrics.hpp"

using namespace sasc;

namespace {

Image2D constant(std::size_t n, double v, double mpp = 1.0) { return Image2D(n, n, mpp, v); }

Image2D vertical_step(std::size_t n) {
  Image2D img(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = n / 2; c < n; ++c) img(r, c) = 1.0;
  return img;
}

}  // namespace

TEST(Image2D, Validation) {
  EXPECT_THROW(Image2D(0, 3), InvalidArgument);
  EXPECT_THROW(Image2D(2, 2, std::vector<double>{1, 2, 3}), InvalidArgument);
  EXPECT_THROW(Image2D(1, 1, std::vector<double>{NAN}), InvalidArgument);
  EXPECT_THROW(Image2D(1, 1, 0.0), InvalidArgument);
}

TEST(NormalizeUnit, Affine) {
  const auto n = normalize_unit(Image2D(3, 1, std::vector<double>{2, 4, 6}));
  EXPECT_EQ(n(0, 0), 0.0);
  EXPECT_EQ(n(0, 1), 0.5);
  EXPECT_EQ(n(0, 2), 1.0);
}

TEST(NormalizeUnit, ConstantToZeros) {
  const auto n = normalize_unit(constant(4, 7.0));
  for (double v : n.values()) EXPECT_EQ(v, 0.0);
}

TEST(NormalizeUnit, Idempotent) {
  std::mt19937_64 gen(1);
  const auto once = normalize_unit(oracle::random_image(gen, 9, 7, -3, 8));
  EXPECT_EQ(normalize_unit(once), once);
}

TEST(Drc, KnownValues) {
  const auto d = dynamic_range_compress(Image2D(3, 1, std::vector<double>{1.0, 0.1, 0.0}), 1e-10);
  EXPECT_NEAR(d(0, 0), 0.0, 1e-8);
  EXPECT_NEAR(d(0, 1), -20.0, 1e-8);
  EXPECT_NEAR(d(0, 2), -200.0, 1e-9);
  EXPECT_TRUE(std::isfinite(d(0, 2)));
}

TEST(Drc, RejectsBadEpsilon) {
  EXPECT_THROW(dynamic_range_compress(constant(2, 0.5), 0.0), InvalidArgument);
  EXPECT_THROW(dynamic_range_compress(constant(2, 0.5), -1.0), InvalidArgument);
}

TEST(IntegralImage, SinglePixel) {
  const auto t = integral_image(Image2D(1, 1, std::vector<double>{3.5}));
  EXPECT_EQ(t.at(0, 0), 3.5);
}

TEST(IntegralImage, OnesBoxSum) {
  const auto t = integral_image(constant(4, 1.0));
  for (std::size_t r = 0; r + 2 <= 4; ++r)
    for (std::size_t c = 0; c + 2 <= 4; ++c) EXPECT_EQ(t.box_sum(r, c, 2, 2), 4.0);
}

TEST(IntegralImage, MatchesNaiveSummation) {
  std::mt19937_64 gen(2);
  const auto img = oracle::random_image(gen, 16, 16);
  const auto t = integral_image(img);
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      for (std::size_t h = 1; r + h <= 16; h += 3) {
        for (std::size_t w = 1; c + w <= 16; w += 4) {
          double s = 0, s2 = 0;
          for (std::size_t i = r; i < r + h; ++i)
            for (std::size_t j = c; j < c + w; ++j) s += img(i, j), s2 += img(i, j) * img(i, j);
          ASSERT_NEAR(t.box_sum(r, c, h, w), s, 1e-9);
          ASSERT_NEAR(t.box_sum_squares(r, c, h, w), s2, 1e-9);
        }
      }
    }
  }
}

TEST(Lacunarity, ConstantIsOne) {
  for (std::size_t b : {1u, 2u, 5u}) EXPECT_EQ(lacunarity_px(constant(8, 0.3), b), 1.0);
}

TEST(Lacunarity, HalfZerosHalfOnes) { EXPECT_DOUBLE_EQ(lacunarity_px(vertical_step(8), 1), 2.0); }

TEST(Lacunarity, MatchesGlidingBoxOracle) {
  std::mt19937_64 gen(3);
  const auto img = oracle::random_image(gen, 16, 16);
  EXPECT_NEAR(lacunarity_px(img, 3), oracle::lacunarity(img, 3), 1e-9);
}

TEST(Lacunarity, PhysicalBoxSize) {
  std::mt19937_64 gen(5);
  auto img = oracle::random_image(gen, 20, 20);
  img.set_meters_per_pixel(0.1);
  EXPECT_DOUBLE_EQ(lacunarity(img, 0.5), lacunarity_px(img, 5));
}

TEST(Lacunarity, Errors) {
  EXPECT_THROW(lacunarity_px(constant(4, 0.0), 2), UndefinedLacunarity);
  EXPECT_THROW(lacunarity_px(constant(4, 1.0), 5), InvalidArgument);
  EXPECT_THROW(lacunarity_px(constant(4, 1.0), 0), InvalidArgument);
  EXPECT_THROW(lacunarity_px(constant(4, -1.0), 2), InvalidArgument);
}

TEST(Sobel, KernelSizeInPixels) {
  EXPECT_EQ(sobel_kernel_px(1.5, 0.05), 31u);
  EXPECT_EQ(sobel_kernel_px(1.5, 0.0375), 41u);
  EXPECT_EQ(sobel_kernel_px(0.4, 0.1), 5u);  // 4 -> 5
  EXPECT_EQ(sobel_kernel_px(0.01, 1.0), 3u);
}

TEST(Sobel, ThreeTapIsScaledSobel) {
  const auto k = make_sobel_kernel(3);
  ASSERT_EQ(k.smoothing.size(), 3u);
  EXPECT_DOUBLE_EQ(k.smoothing[0], 0.25);
  EXPECT_DOUBLE_EQ(k.smoothing[1], 0.5);
  EXPECT_DOUBLE_EQ(k.derivative[0], -1.0);
  EXPECT_DOUBLE_EQ(k.derivative[1], 0.0);
  EXPECT_DOUBLE_EQ(k.derivative[2], 1.0);
  EXPECT_THROW(make_sobel_kernel(4), InvalidArgument);
  EXPECT_THROW(make_sobel_kernel(1), InvalidArgument);
}

TEST(Sobel, ResponsesMatchDirectConvolution) {
  std::mt19937_64 gen(6);
  const auto img = oracle::random_image(gen, 23, 19);
  for (int k : {3, 5, 9}) {
    const auto g = sobel_responses(img, k);
    const auto [kx, ky] = oracle::sobel_kernels(k);
    const auto ox = oracle::correlate_valid(img, kx), oy = oracle::correlate_valid(img, ky);
    ASSERT_EQ(g.gx.height(), ox.size());
    ASSERT_EQ(g.gx.width(), ox[0].size());
    for (std::size_t r = 0; r < ox.size(); ++r) {
      for (std::size_t c = 0; c < ox[r].size(); ++c) {
        ASSERT_NEAR(g.gx(r, c), ox[r][c], 1e-9);
        ASSERT_NEAR(g.gy(r, c), oy[r][c], 1e-9);
      }
    }
  }
}

TEST(EdgeIntensity, StepMatchesOracle) {
  const auto img = vertical_step(32);
  EXPECT_NEAR(edge_intensity_px(img, 3), oracle::edge_intensity(img, 3), 1e-9);
  EXPECT_GT(edge_intensity_px(img, 3), 0.0);
}

TEST(EdgeIntensity, ConstantIsZero) { EXPECT_EQ(edge_intensity_px(constant(16, 4.2), 5), 0.0); }

TEST(EdgeIntensity, TransposeInvariant) {
  std::mt19937_64 gen(7);
  const auto img = oracle::random_image(gen, 21, 17);
  EXPECT_NEAR(edge_intensity_px(img, 5), edge_intensity_px(img.transposed(), 5), 1e-12);
}

TEST(EdgeIntensity, KernelTooLarge) { EXPECT_THROW(edge_intensity_px(constant(4, 1), 5), InvalidArgument); }

TEST(StructuralEntropy, ConstantIsZero) { EXPECT_EQ(structural_entropy(constant(8, 3.0), 64), 0.0); }

TEST(StructuralEntropy, MatchesCountingOracle) {
  std::mt19937_64 gen(8);
  for (int bins : {2, 5, 16, 64}) {
    const auto img = oracle::random_image(gen, 13, 11);
    EXPECT_NEAR(structural_entropy(img, bins), oracle::structural_entropy(img, bins), 1e-12);
  }
}

TEST(StructuralEntropy, NoiseApproachesOne) {
  std::mt19937_64 gen(9);
  EXPECT_GE(structural_entropy(oracle::random_image(gen, 256, 256), 16), 0.95);
}

TEST(StructuralEntropy, IdenticalHorizontalNeighboursContributeNothing) {
  // Rows of one repeated i.i.d. value: horizontal pairs sit on the diagonal of
  // the joint distribution (H - I = 0 for them), vertical pairs are independent.
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u;
  const std::size_t n = 128;
  Image2D striped(n, n), noise(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const double v = u(gen);
    for (std::size_t c = 0; c < n; ++c) striped(r, c) = v, noise(r, c) = u(gen);
  }
  const double g = structural_entropy(striped, 8);
  EXPECT_NEAR(g, oracle::structural_entropy(striped, 8), 1e-12);
  EXPECT_LT(g, structural_entropy(noise, 8) - 0.2);

  // Only horizontal pairs exist in spirit when every row is constant and all
  // rows share the value: the image is constant.
  Image2D one_value(n, 2);
  for (std::size_t c = 0; c < n; ++c) one_value(0, c) = one_value(1, c) = 0.3;
  EXPECT_EQ(structural_entropy(one_value, 8), 0.0);
}

TEST(StructuralEntropy, Errors) {
  EXPECT_THROW(structural_entropy(constant(4, 1), 1), InvalidArgument);
  EXPECT_THROW(structural_entropy(Image2D(1, 5), 4), InvalidArgument);
}

TEST(MedianFilter, ConstantUnchanged) {
  const auto img = constant(9, 2.5);
  EXPECT_EQ(median_filter(img, 3), img);
}

TEST(MedianFilter, ImpulseRemoved) {
  Image2D img(32, 32);
  img(10, 17) = 100.0;
  const auto out = median_filter(img, 3);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(MedianFilter, MatchesSortOracleExactly) {
  std::mt19937_64 gen(11);
  for (int k : {1, 3, 5, 7}) {
    const auto img = oracle::random_image(gen, 16, 13);
    EXPECT_EQ(median_filter(img, k), oracle::median(img, k)) << "k=" << k;
  }
}

TEST(MedianFilter, Errors) {
  EXPECT_THROW(median_filter(constant(8, 1), 4), InvalidArgument);
  EXPECT_THROW(median_filter(constant(4, 1), 5), InvalidArgument);
}

TEST(Colorize, GrayscaleRamp) {
  const auto rgb = colorize(Image2D(2, 1, std::vector<double>{0.0, 1.0}), Colormap::Grayscale);
  ASSERT_EQ(rgb.data.size(), 6u);
  EXPECT_EQ(rgb.data[0], 0);
  EXPECT_EQ(rgb.data[3], 255);
  EXPECT_EQ(rgb.data[4], 255);
}

TEST(Colorize, PaletteNames) {
  for (auto c : {Colormap::Grayscale, Colormap::Jet, Colormap::Hot}) EXPECT_EQ(parse_colormap(to_string(c)), c);
  EXPECT_THROW(parse_colormap("viridis"), InvalidArgument);
}

TEST(CompressionRatio, Deterministic) {
  std::mt19937_64 gen(12);
  const auto img = oracle::random_image(gen, 64, 64);
  const MetricConfig cfg;
  const auto a = compression_ratio(img, cfg), b = compression_ratio(img, cfg);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_EQ(a.ratio_rmse, b.ratio_rmse);
  EXPECT_GT(a.ratio, 0.0);
}

TEST(CompressionRatio, ConstantImageGuardedRmse) {
  const auto r = compression_ratio(constant(64, 1.0), MetricConfig{});
  EXPECT_LT(r.rmse, 1e-6);
  EXPECT_TRUE(std::isfinite(r.ratio_rmse));
  EXPECT_DOUBLE_EQ(r.ratio_rmse, r.ratio / 1e-6);
}

TEST(CompressionRatio, RatioDefinition) {
  std::mt19937_64 gen(13);
  const auto r = compression_ratio(oracle::random_image(gen, 48, 40), MetricConfig{});
  EXPECT_DOUBLE_EQ(r.ratio, static_cast<double>(r.lossy_bytes) / static_cast<double>(r.lossless_bytes));
  EXPECT_DOUBLE_EQ(r.ratio_rmse, r.ratio / std::max(r.rmse, 1e-6));
}

TEST(CompressionRatio, ConstantAboveNoise) {
  // JPEG carries fixed header and table overhead that a deflated constant PNG
  // does not, so the lossy/lossless byte ratio is larger for flat images.
  std::mt19937_64 gen(14);
  const MetricConfig cfg;
  Image2D noise = oracle::random_image(gen, 200, 200);
  EXPECT_GT(compression_ratio(constant(200, 0.5), cfg).ratio, compression_ratio(noise, cfg).ratio);
}

TEST(MetricConfig, Validation) {
  MetricConfig c;
  EXPECT_NO_THROW(c.validate());
  c.median_kernel_px = 14;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.entropy_bins = 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.jpeg_quality = 101;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.drc_epsilon = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(MetricVector, ConstantChip) {
  const auto mv = compute_metric_vector(constant(64, 0.7, 0.05), MetricConfig{});
  EXPECT_FALSE(mv.lacunarity.has_value());
  ASSERT_FALSE(mv.failures.empty());
  EXPECT_EQ(mv.failures.front().field, "lacunarity");
  EXPECT_EQ(mv.failures.front().reason, "UNDEFINED_LACUNARITY");
  EXPECT_EQ(mv.edge_intensity, 0.0);
  EXPECT_EQ(mv.entropy, 0.0);
}

TEST(MetricVector, SmallChipReportsPerFieldFailures) {
  // 12 px at 0.05 m/px cannot host a 31 px Sobel kernel or the 15 px median.
  std::mt19937_64 gen(15);
  auto img = oracle::random_image(gen, 12, 12, 0.1, 1.0);
  img.set_meters_per_pixel(0.05);
  const auto mv = compute_metric_vector(img, MetricConfig{});
  EXPECT_TRUE(mv.lacunarity.has_value());
  EXPECT_FALSE(mv.edge_intensity.has_value());
  EXPECT_TRUE(mv.entropy.has_value());
  EXPECT_FALSE(mv.compression_ratio.has_value());
  EXPECT_GE(mv.failures.size(), 2u);
}

TEST(Codec, JpegRoundTripPreservesSize) {
  RgbImage img{8, 4, std::vector<std::uint8_t>(8 * 4 * 3, 128)};
  const auto jpg = encode_jpeg_rgb(img, 90);
  const auto back = decode_jpeg_rgb(jpg);
  EXPECT_EQ(back.width, 8u);
  EXPECT_EQ(back.height, 4u);
  EXPECT_NEAR(back.data[5], 128, 2);
  EXPECT_THROW(decode_jpeg_rgb(Bytes{1, 2, 3}), MetricUnavailable);
}

TEST(Codec, RasterFilesRoundTrip) {
  testutil::TempDir dir;
  std::mt19937_64 gen(16);
  const auto img = oracle::random_image(gen, 12, 9, 0.0, 5.0);
  write_tiff_float32(dir / "a.tif", img);
  const auto tif = read_raster(dir / "a.tif");
  ASSERT_EQ(tif.width(), 12u);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(tif.values()[i], static_cast<float>(img.values()[i]));

  // 16-bit PNG stores rounded counts.
  write_png_gray16(dir / "b.png", img);
  const auto png = read_raster(dir / "b.png");
  ASSERT_EQ(png.height(), 9u);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(png.values()[i], std::round(img.values()[i]));
  EXPECT_THROW(read_raster(dir / "missing.tif"), DataError);
}
