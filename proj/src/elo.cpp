#include "sasc/elo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "sasc/errors.hpp"
#include "sasc/rng.hpp"

namespace sasc {

namespace {

inline double expectation(double r_i, double r_j, double scale) {
  return 1.0 / (std::pow(10.0, -(r_i - r_j) / scale) + 1.0);
}

struct IndexedComparison {
  std::uint32_t left;
  std::uint32_t right;
  double left_weight;
};

// Zero-sum by construction: the right image moves by exactly -delta.
inline void apply(std::vector<double>& ratings, const IndexedComparison& c, double k, double scale) {
  double& rl = ratings[c.left];
  double& rr = ratings[c.right];
  const double delta = k * (c.left_weight - expectation(rl, rr, scale));
  rl += delta;
  rr -= delta;
}

std::vector<ImageId> sorted_unique(std::span<const ImageId> ids) {
  std::vector<ImageId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<IndexedComparison> index_comparisons(std::span<const Comparison> comparisons,
                                                 const std::vector<ImageId>& ids) {
  std::unordered_map<std::string_view, std::uint32_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<std::uint32_t>(i));

  std::vector<IndexedComparison> out;
  out.reserve(comparisons.size());
  for (const auto& c : comparisons) {
    if (c.left == c.right) {
      throw InvalidArgument("comparison " + c.id + " pairs image '" + c.left + "' with itself");
    }
    const auto l = index.find(c.left);
    const auto r = index.find(c.right);
    if (l == index.end() || r == index.end()) {
      const auto& missing = l == index.end() ? c.left : c.right;
      throw ReferentialIntegrityError("comparison " + c.id + " references unknown image '" + missing + "'");
    }
    out.push_back({l->second, r->second, outcome_weight(c.outcome, Perspective::Left)});
  }
  return out;
}

double quantile_linear(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::LeftMoreComplex:
      return "LEFT";
    case Outcome::RightMoreComplex:
      return "RIGHT";
    case Outcome::Neutral:
      return "NEUTRAL";
  }
  return "NEUTRAL";
}

Outcome parse_outcome(std::string_view s) {
  if (s == "LEFT") return Outcome::LeftMoreComplex;
  if (s == "RIGHT") return Outcome::RightMoreComplex;
  if (s == "NEUTRAL") return Outcome::Neutral;
  throw InvalidArgument("unknown outcome '" + std::string(s) + "' (expected LEFT, RIGHT or NEUTRAL)");
}

void EloConfig::validate() const {
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) throw InvalidArgument("k_factor must be positive");
  if (!(logistic_scale > 0.0) || !std::isfinite(logistic_scale)) {
    throw InvalidArgument("logistic_scale must be positive");
  }
  if (!std::isfinite(initial_rating)) throw InvalidArgument("initial_rating must be finite");
  if (num_replications < 1) throw InvalidArgument("num_replications must be at least 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidArgument("ci_level must lie in (0, 1)");
}

RatingState::RatingState(std::vector<ImageId> ids, double initial_rating) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  ratings_.assign(ids_.size(), initial_rating);
}

bool RatingState::contains(std::string_view id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

double RatingState::rating(std::string_view id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) {
    throw ReferentialIntegrityError("no rating for image '" + std::string(id) + "'");
  }
  return ratings_[static_cast<std::size_t>(it - ids_.begin())];
}

double RatingState::total() const { return std::accumulate(ratings_.begin(), ratings_.end(), 0.0); }

std::size_t RatingState::ensure(const ImageId& id, double initial_rating) {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  const auto pos = static_cast<std::size_t>(it - ids_.begin());
  if (it == ids_.end() || *it != id) {
    ids_.insert(it, id);
    ratings_.insert(ratings_.begin() + static_cast<std::ptrdiff_t>(pos), initial_rating);
  }
  return pos;
}

const ImageRating* EloResult::find(std::string_view id) const {
  const auto it = std::lower_bound(images.begin(), images.end(), id,
                                   [](const ImageRating& r, std::string_view v) { return r.id < v; });
  return it != images.end() && it->id == id ? &*it : nullptr;
}

double expected_score(double r_i, double r_j, double scale) {
  if (!std::isfinite(r_i) || !std::isfinite(r_j)) throw InvalidArgument("ratings must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("logistic scale must be positive");
  return expectation(r_i, r_j, scale);
}

double outcome_weight(Outcome outcome, Perspective perspective) {
  double left = 0.5;
  if (outcome == Outcome::LeftMoreComplex) left = 1.0;
  if (outcome == Outcome::RightMoreComplex) left = 0.0;
  return perspective == Perspective::Left ? left : 1.0 - left;
}

void update_pair(RatingState& state, const Comparison& comparison, const EloConfig& config) {
  if (comparison.left == comparison.right) {
    throw InvalidArgument("comparison " + comparison.id + " pairs image '" + comparison.left + "' with itself");
  }
  state.ensure(comparison.left, config.initial_rating);
  // Inserting the right image can shift the left one, so look it up again.
  const auto r = state.ensure(comparison.right, config.initial_rating);
  const auto l = state.ensure(comparison.left, config.initial_rating);
  const double w = expected_score(state.at_index(l), state.at_index(r), config.logistic_scale);
  const double delta = config.k_factor * (outcome_weight(comparison.outcome, Perspective::Left) - w);
  state.at_index(l) += delta;
  state.at_index(r) -= delta;
  state.count_event();
}

RatingState run_sequence(std::span<const Comparison> comparisons, std::span<const ImageId> image_ids,
                         const EloConfig& config) {
  config.validate();
  RatingState state(sorted_unique(image_ids), config.initial_rating);
  // Validates referential integrity before anything is applied.
  index_comparisons(comparisons, state.ids());
  for (const auto& c : comparisons) update_pair(state, c, config);
  return state;
}

EloResult run_replicated(std::span<const Comparison> comparisons, std::span<const ImageId> image_ids,
                         const EloConfig& config) {
  config.validate();
  const auto ids = sorted_unique(image_ids);
  if (ids.empty()) throw InvalidArgument("run_replicated needs at least one image");
  const auto indexed = index_comparisons(comparisons, ids);

  const std::size_t n_images = ids.size();
  const std::size_t n_reps = config.num_replications;
  // samples[image * n_reps + rep]; each replication writes only its own column.
  std::vector<double> samples(n_images * n_reps);

  auto run_replication = [&](std::size_t rep, std::vector<double>& ratings, std::vector<std::uint32_t>& order) {
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(stream_seed(config.seed, rep));
    rng.shuffle(order);
    std::fill(ratings.begin(), ratings.end(), config.initial_rating);
    for (const auto idx : order) apply(ratings, indexed[idx], config.k_factor, config.logistic_scale);
    for (std::size_t i = 0; i < n_images; ++i) samples[i * n_reps + rep] = ratings[i];
  };

  unsigned workers = config.num_workers != 0 ? config.num_workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::min<std::size_t>(n_reps, 64)));

  auto worker = [&](unsigned w) {
    std::vector<double> ratings(n_images);
    std::vector<std::uint32_t> order(indexed.size());
    for (std::size_t rep = w; rep < n_reps; rep += workers) run_replication(rep, ratings, order);
  };

  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
  }

  std::vector<std::uint64_t> counts(n_images, 0);
  for (const auto& c : indexed) {
    ++counts[c.left];
    ++counts[c.right];
  }

  EloResult result;
  result.config = config;
  result.images.reserve(n_images);
  std::vector<double> sorted(n_reps);
  for (std::size_t i = 0; i < n_images; ++i) {
    const std::span<const double> column(samples.data() + i * n_reps, n_reps);
    ImageRating r;
    r.id = ids[i];
    r.comparisons_count = counts[i];
    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    if (*mn == *mx) {
      r.mean_rating = r.ci_low = r.ci_high = *mn;
      r.std_rating = 0.0;
    } else {
      double sum = 0.0;
      for (const double v : column) sum += v;
      r.mean_rating = sum / static_cast<double>(n_reps);
      double ss = 0.0;
      for (const double v : column) ss += (v - r.mean_rating) * (v - r.mean_rating);
      r.std_rating = std::sqrt(ss / static_cast<double>(n_reps - 1));
      std::copy(column.begin(), column.end(), sorted.begin());
      std::sort(sorted.begin(), sorted.end());
      const double tail = (1.0 - config.ci_level) / 2.0;
      // Percentile bounds can exclude the mean on heavily skewed samples.
      r.ci_low = std::min(quantile_linear(sorted, tail), r.mean_rating);
      r.ci_high = std::max(quantile_linear(sorted, 1.0 - tail), r.mean_rating);
    }
    result.images.push_back(std::move(r));
  }
  return result;
}

std::pair<double, double> confidence_interval(std::span<const double> samples, double level) {
  if (samples.empty()) throw InvalidArgument("confidence_interval of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_linear(sorted, tail), quantile_linear(sorted, 1.0 - tail)};
}

}  // namespace sasc
