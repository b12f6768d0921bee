#include "sasc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sasc/errors.hpp"

namespace sasc {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("vectors differ in length");
  if (x.size() < 2) throw InvalidArgument("need at least two observations");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::pair<ImageId, ImageId> canonical_pair(const Comparison& c) {
  return c.left < c.right ? std::pair{c.left, c.right} : std::pair{c.right, c.left};
}

}  // namespace

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

int encode_outcome(const Comparison& c, const std::pair<ImageId, ImageId>& canonical) {
  const bool same = c.left == canonical.first && c.right == canonical.second;
  const bool flipped = c.left == canonical.second && c.right == canonical.first;
  if (!same && !flipped) {
    throw InvalidArgument("comparison " + c.id + " does not judge the pair (" + canonical.first + ", " +
                          canonical.second + ")");
  }
  int v = 0;
  if (c.outcome == Outcome::LeftMoreComplex) v = 1;
  if (c.outcome == Outcome::RightMoreComplex) v = -1;
  return flipped ? -v : v;
}

ConsistencyMatrix operator_consistency(std::span<const Comparison> comparisons) {
  ConsistencyMatrix m;
  for (const auto& c : comparisons) m.operator_ids.push_back(c.operator_id);
  std::sort(m.operator_ids.begin(), m.operator_ids.end());
  m.operator_ids.erase(std::unique(m.operator_ids.begin(), m.operator_ids.end()), m.operator_ids.end());
  const std::size_t n = m.operator_ids.size();
  m.matrix.assign(n * n, std::nullopt);
  m.pair_counts.assign(n * n, 0);

  auto op_index = [&](const std::string& op) {
    return static_cast<std::size_t>(std::lower_bound(m.operator_ids.begin(), m.operator_ids.end(), op) -
                                    m.operator_ids.begin());
  };

  // Original (non-repeat) judgments per operator and image pair, in log order.
  std::vector<std::map<std::pair<ImageId, ImageId>, std::vector<int>>> by_pair(n);
  std::unordered_map<std::string, const Comparison*> by_id;
  for (const auto& c : comparisons) by_id.emplace(c.id, &c);

  std::vector<std::vector<double>> self_first(n), self_second(n);
  for (const auto& c : comparisons) {
    const auto op = op_index(c.operator_id);
    const auto key = canonical_pair(c);
    if (!c.repeat_of) {
      by_pair[op][key].push_back(encode_outcome(c, key));
      continue;
    }
    const auto orig = by_id.find(*c.repeat_of);
    if (orig == by_id.end() || orig->second->operator_id != c.operator_id) continue;
    if (canonical_pair(*orig->second) != key) continue;
    self_first[op].push_back(encode_outcome(*orig->second, key));
    self_second[op].push_back(encode_outcome(c, key));
  }

  auto set = [&](std::size_t i, std::size_t j, const std::vector<double>& a, const std::vector<double>& b) {
    m.pair_counts[i * n + j] = m.pair_counts[j * n + i] = a.size();
    if (a.size() < 2) return;
    const auto r = pearson(a, b);
    m.matrix[i * n + j] = m.matrix[j * n + i] = r;
  };

  for (std::size_t i = 0; i < n; ++i) {
    set(i, i, self_first[i], self_second[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> a, b;
      for (const auto& [key, mine] : by_pair[i]) {
        const auto theirs = by_pair[j].find(key);
        if (theirs == by_pair[j].end()) continue;
        // Co-rated instances pair up by order of occurrence.
        const std::size_t shared = std::min(mine.size(), theirs->second.size());
        for (std::size_t k = 0; k < shared; ++k) {
          a.push_back(mine[k]);
          b.push_back(theirs->second[k]);
        }
      }
      set(i, j, a, b);
    }
  }
  return m;
}

RegressionResult linear_regression(std::span<const double> x, std::span<const double> y, std::string metric_name) {
  check_lengths(x, y);
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateRegressor("regressor is constant; slope undefined");

  RegressionResult r;
  r.n = x.size();
  r.metric_name = std::move(metric_name);
  if (syy == 0.0) {
    r.slope = 0.0;
    r.intercept = my;
    r.r_squared = 0.0;
    return r;
  }
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss_res += e * e;
  }
  r.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return r;
}

double box_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) + 1.0) * p;  // 1-based position
  if (h <= 1.0) return sorted.front();
  if (h >= static_cast<double>(sorted.size())) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(h));
  return sorted[lo - 1] + (h - static_cast<double>(lo)) * (sorted[lo] - sorted[lo - 1]);
}

std::vector<SiteSummary> site_summary(const EloResult& elo, const std::map<ImageId, std::string>& site_of) {
  std::map<std::string, std::vector<std::pair<double, ImageId>>> groups;
  for (const auto& img : elo.images) {
    const auto it = site_of.find(img.id);
    if (it == site_of.end()) throw ReferentialIntegrityError("image '" + img.id + "' has no site label");
    groups[it->second].emplace_back(img.mean_rating, img.id);
  }

  std::vector<SiteSummary> out;
  for (auto& [site, members] : groups) {
    std::sort(members.begin(), members.end());
    std::vector<double> scores;
    for (const auto& m : members) scores.push_back(m.first);

    SiteSummary s;
    s.site = site;
    s.count = scores.size();
    s.q1 = box_quantile(scores, 0.25);
    s.median = box_quantile(scores, 0.5);
    s.q3 = box_quantile(scores, 0.75);
    const double iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
    bool seen = false;
    for (const auto& [score, id] : members) {
      if (score < lo_fence || score > hi_fence) {
        s.outliers.emplace_back(id, score);
        continue;
      }
      if (!seen) s.whisker_low = score;
      s.whisker_high = score;
      seen = true;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RankedImage> rank_order(const EloResult& elo) {
  std::vector<RankedImage> out;
  out.reserve(elo.images.size());
  for (const auto& img : elo.images) out.push_back({img.id, img.mean_rating, img.ci_low, img.ci_high});
  std::sort(out.begin(), out.end(), [](const RankedImage& a, const RankedImage& b) {
    return a.mean != b.mean ? a.mean > b.mean : a.id < b.id;
  });
  return out;
}

}  // namespace sasc
