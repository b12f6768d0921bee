#pragma once

// Synthetic seabed textures standing in for real sonar chips. All textures
// share a multiplicative exponential speckle model, so values are > 0.

#include <cstdint>
#include <string>
#include <variant>

#include "sasc/dataset.hpp"

namespace sasc {

struct FlatSpeckle {};

struct Ripples {
  double wavelength_m = 1.0;
  double orientation_rad = 0.0;  // direction of the ripple crests' normal
  double modulation = 0.8;       // in [0, 1)
};

struct Clutter {
  int count = 8;  // bright point scatterers, each casting a shadow
};

struct Bioturbation {
  double patch_density = 0.5;  // pits and mounds per square meter
};

// Patchwork of ripples, bioturbation, coral-like blobs and flat seabed.
struct Mixed {};

using TextureKind = std::variant<FlatSpeckle, Ripples, Clutter, Bioturbation, Mixed>;

std::string texture_name(const TextureKind& kind);

// Deterministic for a fixed (kind, size_px, mpp, seed). The chip id encodes
// the texture and seed; site is left empty and range_m set to 25 m.
ImageChip synthesize_chip(const TextureKind& kind, std::size_t size_px, double mpp, std::uint64_t seed);

}  // namespace sasc
