#pragma once

// Simulated raters for desk-scale reproduction: latent complexities plus a
// logistic (Bradley-Terry) choice model with a neutral band.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sasc/elo.hpp"
#include "sasc/rng.hpp"

namespace sasc {

struct RaterModel {
  std::string id = "rater1";
  // Logistic scale in rating points; 0 makes the rater deterministic.
  double noise_scale = 400.0;
  // Rating points added to the left image before judging.
  double bias = 0.0;
  // |perceived difference| below this yields NEUTRAL.
  double neutral_band = 0.0;
};

struct SimulationConfig {
  std::size_t n_images = 117;
  std::size_t n_comparisons = 5722;
  std::vector<RaterModel> raters = default_raters();
  double latent_center = 1000.0;
  double latent_spread = 600.0;  // latents uniform on center +- spread/2
  double p_repeat = 0.0;
  std::uint64_t seed = 0;
  std::int64_t start_ms = 1700000000000;  // fixed so logs are reproducible
  std::int64_t step_ms = 4000;

  static std::vector<RaterModel> default_raters();
  void validate() const;
};

struct SimulatedLog {
  std::vector<ImageId> image_ids;
  std::vector<double> latent;  // parallel to image_ids
  std::vector<Comparison> comparisons;
};

Outcome simulate_outcome(const RaterModel& rater, double latent_left, double latent_right, Rng& rng);

// Image ids are img001, img002, ... and latents are drawn from the seed.
SimulatedLog simulate_judgments(const SimulationConfig& cfg);

// Uses the given ids and latents; cfg.n_images and the latent draw are ignored.
SimulatedLog simulate_judgments(const SimulationConfig& cfg, std::vector<ImageId> image_ids, std::vector<double> latent);

}  // namespace sasc
