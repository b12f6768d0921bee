#pragma once

// Elo ratings from pairwise complexity judgments.
//
// Each judgment is treated as a contest between two images; the image judged
// more complex "wins". Because the sequential update depends on the order in
// which judgments are folded in, ratings are estimated as the mean over many
// independently shuffled replays of the same judgment set.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sasc {

using ImageId = std::string;

enum class Outcome { LeftMoreComplex, RightMoreComplex, Neutral };

enum class Perspective { Left, Right };

// "LEFT" | "RIGHT" | "NEUTRAL", the wire spelling used by the log and HTTP API.
std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view s);

struct Comparison {
  std::string id;
  ImageId left;
  ImageId right;
  Outcome outcome = Outcome::Neutral;
  std::string operator_id;
  std::int64_t timestamp_ms = 0;  // UTC
  std::optional<std::string> repeat_of;

  bool operator==(const Comparison&) const = default;
};

struct EloConfig {
  double k_factor = 32.0;
  double initial_rating = 1000.0;
  double logistic_scale = 400.0;
  std::uint32_t num_replications = 1000;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  // 0 picks std::thread::hardware_concurrency(). Never affects results.
  unsigned num_workers = 0;

  void validate() const;
};

// Ratings keyed by image id. Ids are kept sorted so lookups are binary searches
// and iteration order is deterministic.
class RatingState {
 public:
  RatingState() = default;
  RatingState(std::vector<ImageId> ids, double initial_rating);

  std::size_t size() const { return ids_.size(); }
  const std::vector<ImageId>& ids() const { return ids_; }
  const std::vector<double>& ratings() const { return ratings_; }
  std::uint64_t events_applied() const { return events_applied_; }

  bool contains(std::string_view id) const;
  double rating(std::string_view id) const;
  double total() const;

  // Index of `id`, inserting it at `initial_rating` if absent.
  std::size_t ensure(const ImageId& id, double initial_rating);

  double& at_index(std::size_t i) { return ratings_[i]; }
  void count_event() { ++events_applied_; }

 private:
  std::vector<ImageId> ids_;
  std::vector<double> ratings_;
  std::uint64_t events_applied_ = 0;
};

struct ImageRating {
  ImageId id;
  double mean_rating = 0.0;
  double std_rating = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t comparisons_count = 0;

  bool operator==(const ImageRating&) const = default;
};

struct EloResult {
  std::vector<ImageRating> images;  // sorted by id
  EloConfig config;

  const ImageRating* find(std::string_view id) const;
};

// Logistic expectation that an image rated r_i beats one rated r_j.
double expected_score(double r_i, double r_j, double scale = 400.0);

// 1 for a win, 0.5 for a draw, 0 for a loss, seen from `perspective`.
double outcome_weight(Outcome outcome, Perspective perspective);

// Applies one judgment. Absent images enter at config.initial_rating.
void update_pair(RatingState& state, const Comparison& comparison, const EloConfig& config);

// Folds update_pair over `comparisons` in the given order.
RatingState run_sequence(std::span<const Comparison> comparisons, std::span<const ImageId> image_ids,
                         const EloConfig& config);

// Mean, spread and percentile interval over config.num_replications shuffled
// replays. Bit-identical for a fixed seed regardless of config.num_workers.
EloResult run_replicated(std::span<const Comparison> comparisons, std::span<const ImageId> image_ids,
                         const EloConfig& config);

// Empirical percentile interval with linear interpolation between order
// statistics (position (n-1)p).
std::pair<double, double> confidence_interval(std::span<const double> samples, double level);

}  // namespace sasc
