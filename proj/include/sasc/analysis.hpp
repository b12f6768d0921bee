#pragma once

// Statistics over ratings and judgments: operator agreement, metric-vs-rating
// regression, per-site box statistics and rank tables.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sasc/elo.hpp"

namespace sasc {

// Sample Pearson r, or nullopt when either vector is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Pearson over midranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> x);

// +1 if the comparison judges canonical.first more complex, -1 if
// canonical.second, 0 if neutral.
int encode_outcome(const Comparison& c, const std::pair<ImageId, ImageId>& canonical);

struct ConsistencyMatrix {
  std::vector<std::string> operator_ids;  // sorted
  // Row-major, size n*n; symmetric. Diagonal holds self-consistency.
  std::vector<std::optional<double>> matrix;
  std::vector<std::size_t> pair_counts;

  std::size_t size() const { return operator_ids.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return matrix[i * size() + j]; }
  std::size_t count(std::size_t i, std::size_t j) const { return pair_counts[i * size() + j]; }
};

ConsistencyMatrix operator_consistency(std::span<const Comparison> comparisons);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::string metric_name;
};

// Ordinary least squares of y (metric) on x (rating).
RegressionResult linear_regression(std::span<const double> x, std::span<const double> y,
                                   std::string metric_name = {});

// Quantile with linear interpolation at position (n+1)p, clamped to the
// sample range. Used for box statistics.
double box_quantile(std::span<const double> sorted, double p);

struct SiteSummary {
  std::string site;
  std::size_t count = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<std::pair<ImageId, double>> outliers;
};

// Box statistics of mean ratings per site; whiskers follow the 1.5 IQR rule.
std::vector<SiteSummary> site_summary(const EloResult& elo, const std::map<ImageId, std::string>& site_of);

struct RankedImage {
  ImageId id;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Descending by mean rating, ties by id.
std::vector<RankedImage> rank_order(const EloResult& elo);

}  // namespace sasc
