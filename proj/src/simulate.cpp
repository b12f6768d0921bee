#include "sasc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sasc/errors.hpp"

namespace sasc {

std::vector<RaterModel> SimulationConfig::default_raters() {
  return {{"op1", 400.0, 0.0, 20.0}, {"op2", 400.0, 0.0, 20.0}, {"op3", 400.0, 0.0, 20.0}, {"op4", 400.0, 0.0, 20.0}};
}

void SimulationConfig::validate() const {
  if (n_images < 2) throw InvalidArgument("simulation needs at least two images");
  if (raters.empty()) throw InvalidArgument("simulation needs at least one rater");
  if (!(latent_spread >= 0.0)) throw InvalidArgument("latent_spread must be non-negative");
  if (!(p_repeat >= 0.0 && p_repeat <= 1.0)) throw InvalidArgument("p_repeat must lie in [0, 1]");
  for (const auto& r : raters) {
    if (r.id.empty()) throw InvalidArgument("rater ids must be non-empty");
    if (!(r.noise_scale >= 0.0) || !(r.neutral_band >= 0.0) || !std::isfinite(r.bias)) {
      throw InvalidArgument("rater " + r.id + " has invalid noise, bias or neutral band");
    }
  }
}

Outcome simulate_outcome(const RaterModel& rater, double latent_left, double latent_right, Rng& rng) {
  const double d = latent_left - latent_right + rater.bias;
  if (std::abs(d) < rater.neutral_band) return Outcome::Neutral;
  if (rater.noise_scale == 0.0) {
    if (d == 0.0) return Outcome::Neutral;
    return d > 0.0 ? Outcome::LeftMoreComplex : Outcome::RightMoreComplex;
  }
  const double p_left = 1.0 / (1.0 + std::pow(10.0, -d / rater.noise_scale));
  return rng.bernoulli(p_left) ? Outcome::LeftMoreComplex : Outcome::RightMoreComplex;
}

SimulatedLog simulate_judgments(const SimulationConfig& cfg) {
  cfg.validate();
  Rng rng(stream_seed(cfg.seed, hash_string("latent")));
  std::vector<ImageId> ids;
  std::vector<double> latent;
  char name[32];
  for (std::size_t i = 0; i < cfg.n_images; ++i) {
    std::snprintf(name, sizeof name, "img%03zu", i + 1);
    ids.emplace_back(name);
    latent.push_back(cfg.latent_center + cfg.latent_spread * (rng.uniform() - 0.5));
  }
  return simulate_judgments(cfg, std::move(ids), std::move(latent));
}

SimulatedLog simulate_judgments(const SimulationConfig& cfg, std::vector<ImageId> image_ids, std::vector<double> latent) {
  cfg.validate();
  if (image_ids.size() != latent.size()) throw InvalidArgument("one latent value per image is required");
  if (image_ids.size() < 2) throw InvalidArgument("simulation needs at least two images");

  SimulatedLog log;
  log.image_ids = std::move(image_ids);
  log.latent = std::move(latent);
  Rng rng(stream_seed(cfg.seed, hash_string("judgments")));
  const std::size_t n = log.image_ids.size();

  // Indices into log.comparisons of each rater's original judgments.
  std::vector<std::vector<std::size_t>> originals(cfg.raters.size());
  char id[32];
  for (std::size_t k = 0; k < cfg.n_comparisons; ++k) {
    const auto rater_idx = static_cast<std::size_t>(rng.below(cfg.raters.size()));
    const auto& rater = cfg.raters[rater_idx];
    std::snprintf(id, sizeof id, "sim-%06zu", k + 1);

    Comparison c;
    c.id = id;
    c.operator_id = rater.id;
    c.timestamp_ms = cfg.start_ms + static_cast<std::int64_t>(k) * cfg.step_ms;
    std::size_t left, right;
    const bool repeat = !originals[rater_idx].empty() && rng.bernoulli(cfg.p_repeat);
    if (repeat) {
      const auto& orig = log.comparisons[originals[rater_idx][rng.below(originals[rater_idx].size())]];
      c.repeat_of = orig.id;
      left = static_cast<std::size_t>(std::find(log.image_ids.begin(), log.image_ids.end(), orig.left) - log.image_ids.begin());
      right = static_cast<std::size_t>(std::find(log.image_ids.begin(), log.image_ids.end(), orig.right) - log.image_ids.begin());
      if (rng.bernoulli(0.5)) std::swap(left, right);
    } else {
      left = static_cast<std::size_t>(rng.below(n));
      right = static_cast<std::size_t>(rng.below(n - 1));
      if (right >= left) ++right;
      originals[rater_idx].push_back(log.comparisons.size());
    }
    c.left = log.image_ids[left];
    c.right = log.image_ids[right];
    c.outcome = simulate_outcome(rater, log.latent[left], log.latent[right], rng);
    log.comparisons.push_back(std::move(c));
  }
  return log;
}

}  // namespace sasc
