#include "sasc/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sasc/errors.hpp"
#include "sasc/rng.hpp"

namespace sasc {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Adds amplitude * exp(-d^2 / 2 sigma^2) around (row, col), all in pixels.
void add_blob(Image2D& mean, double row, double col, double sigma, double amplitude) {
  const double reach = 3.0 * sigma;
  const auto r0 = static_cast<std::ptrdiff_t>(std::floor(row - reach));
  const auto r1 = static_cast<std::ptrdiff_t>(std::ceil(row + reach));
  const auto c0 = static_cast<std::ptrdiff_t>(std::floor(col - reach));
  const auto c1 = static_cast<std::ptrdiff_t>(std::ceil(col + reach));
  const auto h = static_cast<std::ptrdiff_t>(mean.height()), w = static_cast<std::ptrdiff_t>(mean.width());
  for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(r0, 0); r <= std::min(r1, h - 1); ++r) {
    for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(c0, 0); c <= std::min(c1, w - 1); ++c) {
      const double d2 = (static_cast<double>(r) - row) * (static_cast<double>(r) - row) +
                        (static_cast<double>(c) - col) * (static_cast<double>(c) - col);
      mean(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += amplitude * std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
}

void add_ripples(Image2D& mean, const Ripples& p, double phase, double weight_floor = 0.0) {
  const double mpp = mean.meters_per_pixel();
  const double kx = std::cos(p.orientation_rad) * kTwoPi / p.wavelength_m;
  const double ky = std::sin(p.orientation_rad) * kTwoPi / p.wavelength_m;
  for (std::size_t r = 0; r < mean.height(); ++r) {
    for (std::size_t c = 0; c < mean.width(); ++c) {
      const double x = static_cast<double>(c) * mpp, y = static_cast<double>(r) * mpp;
      mean(r, c) *= std::max(weight_floor, 1.0 + p.modulation * std::sin(kx * x + ky * y + phase));
    }
  }
}

void add_clutter(Image2D& mean, const Clutter& p, Rng& rng) {
  const double mpp = mean.meters_per_pixel();
  const double h = static_cast<double>(mean.height()), w = static_cast<double>(mean.width());
  for (int i = 0; i < p.count; ++i) {
    const double row = rng.uniform(0.0, h), col = rng.uniform(0.0, w);
    const double radius_px = std::max(1.0, rng.uniform(0.08, 0.2) / mpp);
    const double shadow_len_px = rng.uniform(0.5, 1.5) / mpp;
    // Shadow trails away from the sensor, toward increasing column (range).
    for (std::size_t r = 0; r < mean.height(); ++r) {
      if (std::abs(static_cast<double>(r) - row) > radius_px) continue;
      for (std::size_t c = 0; c < mean.width(); ++c) {
        const double dc = static_cast<double>(c) - col;
        if (dc > radius_px && dc < radius_px + shadow_len_px) mean(r, c) *= 0.08;
      }
    }
    add_blob(mean, row, col, radius_px, rng.uniform(15.0, 40.0));
  }
}

void add_bioturbation(Image2D& mean, const Bioturbation& p, Rng& rng) {
  const double mpp = mean.meters_per_pixel();
  const double area = static_cast<double>(mean.width() * mean.height()) * mpp * mpp;
  const auto patches = static_cast<int>(std::lround(p.patch_density * area));
  for (int i = 0; i < patches; ++i) {
    const double row = rng.uniform(0.0, static_cast<double>(mean.height()));
    const double col = rng.uniform(0.0, static_cast<double>(mean.width()));
    const double sigma = std::max(0.7, rng.uniform(0.05, 0.15) / mpp);
    if (rng.bernoulli(0.5)) {
      add_blob(mean, row, col, sigma, rng.uniform(0.5, 1.5));  // mound
    } else {
      add_blob(mean, row, col, 1.8 * sigma, 0.4);  // rim
      add_blob(mean, row, col, sigma, -1.0);       // pit
    }
  }
}

// Smooth random field in roughly [-1, 1], used to partition mixed chips.
Image2D region_field(std::size_t n, double mpp, Rng& rng) {
  Image2D field(n, n, mpp);
  constexpr int kWaves = 6;
  for (int i = 0; i < kWaves; ++i) {
    const double theta = rng.uniform(0.0, kTwoPi);
    const double wavelength = rng.uniform(4.0, 12.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double kx = std::cos(theta) * kTwoPi / wavelength, ky = std::sin(theta) * kTwoPi / wavelength;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        field(r, c) += std::cos(kx * static_cast<double>(c) * mpp + ky * static_cast<double>(r) * mpp + phase) /
                       std::sqrt(kWaves / 2.0);
  }
  return field;
}

void build_mixed(Image2D& mean, Rng& rng) {
  const std::size_t n = mean.width();
  const double mpp = mean.meters_per_pixel();
  const Image2D field = region_field(n, mpp, rng);

  Image2D ripples(n, n, mpp, 1.0);
  add_ripples(ripples, Ripples{rng.uniform(0.8, 1.5), rng.uniform(0.0, M_PI), 0.8}, rng.uniform(0.0, kTwoPi));

  Image2D coral(n, n, mpp, 0.6);
  const double area = static_cast<double>(n * n) * mpp * mpp;
  for (int i = 0; i < static_cast<int>(area * 3.0); ++i) {
    add_blob(coral, rng.uniform(0.0, static_cast<double>(n)), rng.uniform(0.0, static_cast<double>(n)),
             std::max(0.7, rng.uniform(0.05, 0.25) / mpp), rng.uniform(1.0, 4.0));
  }

  Image2D bio(n, n, mpp, 1.0);
  add_bioturbation(bio, Bioturbation{1.5}, rng);

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double f = field(r, c);
      mean(r, c) = f > 0.35 ? ripples(r, c) : f < -0.35 ? coral(r, c) : bio(r, c);
    }
  }
}

struct KindName {
  std::string operator()(const FlatSpeckle&) const { return "flat"; }
  std::string operator()(const Ripples&) const { return "ripples"; }
  std::string operator()(const Clutter&) const { return "clutter"; }
  std::string operator()(const Bioturbation&) const { return "bioturbation"; }
  std::string operator()(const Mixed&) const { return "mixed"; }
};

}  // namespace

std::string texture_name(const TextureKind& kind) { return std::visit(KindName{}, kind); }

ImageChip synthesize_chip(const TextureKind& kind, std::size_t size_px, double mpp, std::uint64_t seed) {
  if (size_px < 32) throw InvalidArgument("synthetic chips need at least 32 px");
  if (!(mpp > 0.0) || !std::isfinite(mpp)) throw InvalidArgument("meters_per_pixel must be positive");

  Rng rng(stream_seed(seed, hash_string(texture_name(kind))));
  Image2D mean(size_px, size_px, mpp, 1.0);

  if (const auto* p = std::get_if<Ripples>(&kind)) {
    if (!(p->wavelength_m >= 2.0 * mpp)) throw InvalidArgument("ripple wavelength must span at least two pixels");
    if (!(p->modulation >= 0.0 && p->modulation < 1.0)) throw InvalidArgument("ripple modulation must lie in [0, 1)");
    add_ripples(mean, *p, rng.uniform(0.0, kTwoPi));
  } else if (const auto* p = std::get_if<Clutter>(&kind)) {
    if (p->count < 0) throw InvalidArgument("clutter count must be non-negative");
    add_clutter(mean, *p, rng);
  } else if (const auto* p = std::get_if<Bioturbation>(&kind)) {
    if (!(p->patch_density >= 0.0)) throw InvalidArgument("patch density must be non-negative");
    add_bioturbation(mean, *p, rng);
  } else if (std::holds_alternative<Mixed>(kind)) {
    build_mixed(mean, rng);
  }

  ImageChip chip;
  chip.id = texture_name(kind) + "-" + std::to_string(seed);
  chip.range_m = 25.0;
  chip.image = Image2D(size_px, size_px, mpp);
  auto out = chip.image.values();
  const auto m = mean.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(m[i], 0.02) * rng.exponential();
  return chip;
}

}  // namespace sasc
