#pragma once

// Image chips with physical metadata, manifest loading and quality control.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sasc/image.hpp"
#include "sasc/metrics.hpp"

namespace sasc {

enum class QcFlag { Crosstalk, UncompensatedMotion, NoSpectralSupport, ManualExclude };

std::string_view to_string(QcFlag f);
QcFlag parse_qc_flag(std::string_view s);

struct ImageChip {
  std::string id;
  Image2D image;
  std::string site;
  double range_m = 0.0;
  std::set<QcFlag> qc_flags;
};

inline constexpr double kMinRangeM = 10.0;
inline constexpr double kMaxRangeM = 40.0;

// Reasons a chip is not accepted: RANGE_OUT_OF_BOUNDS plus one per QC flag.
std::vector<std::string> qc_rejections(const ImageChip& chip);

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the dataset root
  std::string site;
  double range_m = 0.0;
  std::set<QcFlag> qc_flags;
  std::optional<std::size_t> width;
  std::optional<std::size_t> height;
};

struct DatasetManifest {
  double meters_per_pixel = 0.0;
  std::string created;
  std::string notes;
  std::vector<ManifestEntry> chips;
};

inline constexpr std::string_view kManifestName = "manifest.json";

DatasetManifest read_manifest(const std::filesystem::path& root);
void write_manifest(const std::filesystem::path& root, const DatasetManifest& manifest);

struct Rejection {
  std::string id;
  std::vector<std::string> reasons;
};

struct LoadError {
  std::string id;
  std::string path;
  std::string kind;  // MISSING_FILE, UNDECODABLE, METADATA_MISMATCH, DUPLICATE_ID, BAD_SIDECAR
  std::string detail;
};

struct LoadReport {
  std::vector<ImageChip> accepted;  // sorted by id
  std::vector<Rejection> rejected;
  std::vector<LoadError> errors;
  std::vector<std::string> warnings;
  double meters_per_pixel = 0.0;

  bool ok() const { return errors.empty(); }
};

// Reads manifest.json under `root`, decodes each raster, applies
// <stem>.meta.json sidecar overrides and the QC filter. Problems are
// itemized in the report; only a missing or unparsable manifest throws.
LoadReport load_dataset(const std::filesystem::path& root);

// Writes chips as float32 TIFFs plus manifest.json.
void save_dataset(const std::filesystem::path& root, const std::vector<ImageChip>& chips, double meters_per_pixel,
                  std::string notes = {});

// n (n - 1) / 2.
std::uint64_t count_possible_pairs(std::uint64_t n_images);

MetricVector compute_metric_vector(const ImageChip& chip, const MetricConfig& cfg);

}  // namespace sasc
