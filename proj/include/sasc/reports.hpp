#pragma once

// Pipeline commands and the CSV/SVG artifacts they emit. The command-line
// tool is a thin layer over these functions.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sasc/analysis.hpp"
#include "sasc/dataset.hpp"
#include "sasc/elo.hpp"
#include "sasc/metrics.hpp"
#include "sasc/simulate.hpp"

namespace sasc {

// Fixed 9-significant-digit rendering used in every CSV.
std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws DataError if absent.
  std::size_t column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

struct ScatterSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<RegressionResult> fit;
};

std::string svg_scatter(const ScatterSeries& s, const std::string& title, const std::string& x_label,
                        const std::string& y_label);
std::string svg_rank_plot(const std::vector<RankedImage>& ranked, const std::string& title);
std::string svg_box_plot(const std::vector<SiteSummary>& sites, const std::string& title);

inline constexpr const char* kMetricColumns[] = {"lacunarity", "edge_intensity", "entropy", "compression_ratio",
                                                 "compression_ratio_rmse"};

// Each command writes its artifacts into out_dir and itemizes non-fatal
// problems on `diag`. Fatal problems throw (DataError family, InvalidArgument).

struct MetricsSummary {
  std::size_t rows = 0;
  std::size_t rejected = 0;
  std::size_t load_errors = 0;
};
MetricsSummary cmd_metrics(const std::filesystem::path& dataset_root, const MetricConfig& cfg,
                           const std::filesystem::path& out_dir, unsigned workers, std::ostream& diag);

// Without a dataset the image set is taken from the log and sites are "?".
EloResult cmd_rank(const std::filesystem::path& log_path, const std::optional<std::filesystem::path>& dataset_root,
                   const EloConfig& cfg, const std::filesystem::path& out_dir, std::ostream& diag);

std::vector<RegressionResult> cmd_analyze(const std::filesystem::path& metrics_csv,
                                          const std::filesystem::path& elo_csv,
                                          const std::filesystem::path& out_dir, std::ostream& diag);

ConsistencyMatrix cmd_consistency(const std::filesystem::path& log_path, const std::filesystem::path& out_dir,
                                  double exclude_below, std::ostream& diag);

struct SimulateOptions {
  SimulationConfig sim;
  bool with_chips = false;
  std::size_t chip_size_px = 200;
  double meters_per_pixel = 0.05;
  std::string latent_from_metric;  // empty: latents drawn at random
  MetricConfig metric_cfg;
};

SimulatedLog cmd_simulate(const SimulateOptions& opts, const std::filesystem::path& out_dir, std::ostream& diag);

// Synthetic chips cycling through sites A-E (benign, medium ripples,
// benign with clutter, mixed, fine ripples).
std::vector<ImageChip> synthesize_site_chips(std::size_t n, std::size_t size_px, double mpp, std::uint64_t seed);

}  // namespace sasc
