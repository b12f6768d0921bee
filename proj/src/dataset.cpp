#include "sasc/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sasc/codec.hpp"
#include "sasc/errors.hpp"

namespace sasc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::set<QcFlag> parse_flags(const json& j) {
  std::set<QcFlag> flags;
  for (const auto& f : j) flags.insert(parse_qc_flag(f.get<std::string>()));
  return flags;
}

// Applies the per-chip fields present in `j` to `entry`.
void apply_fields(ManifestEntry& entry, const json& j) {
  if (j.contains("id")) entry.id = j.at("id").get<std::string>();
  if (j.contains("path")) entry.path = j.at("path").get<std::string>();
  if (j.contains("site")) entry.site = j.at("site").get<std::string>();
  if (j.contains("range_m")) entry.range_m = j.at("range_m").get<double>();
  if (j.contains("qc_flags")) entry.qc_flags = parse_flags(j.at("qc_flags"));
  if (j.contains("width")) entry.width = j.at("width").get<std::size_t>();
  if (j.contains("height")) entry.height = j.at("height").get<std::size_t>();
}

json entry_to_json(const ManifestEntry& e) {
  json flags = json::array();
  for (const auto f : e.qc_flags) flags.push_back(std::string(to_string(f)));
  json j = {{"id", e.id}, {"path", e.path}, {"site", e.site}, {"range_m", e.range_m}, {"qc_flags", flags}};
  if (e.width) j["width"] = *e.width;
  if (e.height) j["height"] = *e.height;
  return j;
}

std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(QcFlag f) {
  switch (f) {
    case QcFlag::Crosstalk:
      return "CROSSTALK";
    case QcFlag::UncompensatedMotion:
      return "UNCOMPENSATED_MOTION";
    case QcFlag::NoSpectralSupport:
      return "NO_SPECTRAL_SUPPORT";
    case QcFlag::ManualExclude:
      return "MANUAL_EXCLUDE";
  }
  return "MANUAL_EXCLUDE";
}

QcFlag parse_qc_flag(std::string_view s) {
  if (s == "CROSSTALK") return QcFlag::Crosstalk;
  if (s == "UNCOMPENSATED_MOTION") return QcFlag::UncompensatedMotion;
  if (s == "NO_SPECTRAL_SUPPORT") return QcFlag::NoSpectralSupport;
  if (s == "MANUAL_EXCLUDE") return QcFlag::ManualExclude;
  throw InvalidArgument("unknown QC flag '" + std::string(s) + "'");
}

std::vector<std::string> qc_rejections(const ImageChip& chip) {
  std::vector<std::string> reasons;
  if (!(chip.range_m >= kMinRangeM && chip.range_m <= kMaxRangeM)) reasons.emplace_back("RANGE_OUT_OF_BOUNDS");
  for (const auto f : chip.qc_flags) reasons.emplace_back(to_string(f));
  return reasons;
}

DatasetManifest read_manifest(const fs::path& root) {
  const json j = read_json(root / kManifestName);
  DatasetManifest m;
  try {
    if (!j.contains("meters_per_pixel")) throw DataError("manifest lacks meters_per_pixel");
    m.meters_per_pixel = j.at("meters_per_pixel").get<double>();
    if (!(m.meters_per_pixel > 0.0)) throw DataError("manifest meters_per_pixel must be positive");
    m.created = j.value("created", "");
    m.notes = j.value("notes", "");
    for (const auto& c : j.value("chips", json::array())) {
      ManifestEntry e;
      apply_fields(e, c);
      if (e.id.empty() || e.path.empty()) throw DataError("manifest chip entries need id and path");
      m.chips.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const fs::path& root, const DatasetManifest& manifest) {
  json chips = json::array();
  for (const auto& e : manifest.chips) chips.push_back(entry_to_json(e));
  const json j = {{"meters_per_pixel", manifest.meters_per_pixel},
                  {"created", manifest.created},
                  {"notes", manifest.notes},
                  {"chips", chips}};
  std::ofstream out(root / kManifestName);
  if (!out) throw DataError("cannot write " + (root / kManifestName).string());
  out << j.dump(2) << '\n';
}

LoadReport load_dataset(const fs::path& root) {
  const DatasetManifest manifest = read_manifest(root);
  LoadReport report;
  report.meters_per_pixel = manifest.meters_per_pixel;
  std::map<std::string, bool> seen;

  for (ManifestEntry entry : manifest.chips) {
    const fs::path raster = root / entry.path;
    fs::path sidecar = raster;
    sidecar.replace_extension().concat(".meta.json");
    if (fs::exists(sidecar)) {
      try {
        apply_fields(entry, read_json(sidecar));
      } catch (const std::exception& e) {
        report.errors.push_back({entry.id, sidecar.string(), "BAD_SIDECAR", e.what()});
        continue;
      }
    }
    if (seen.count(entry.id)) {
      report.errors.push_back({entry.id, entry.path, "DUPLICATE_ID", "id appears more than once"});
      continue;
    }
    seen[entry.id] = true;
    if (!fs::exists(raster)) {
      report.errors.push_back({entry.id, entry.path, "MISSING_FILE", raster.string() + " does not exist"});
      continue;
    }

    ImageChip chip;
    try {
      chip.image = read_raster(raster);
      chip.image.set_meters_per_pixel(manifest.meters_per_pixel);
    } catch (const std::exception& e) {
      report.errors.push_back({entry.id, entry.path, "UNDECODABLE", e.what()});
      continue;
    }
    if ((entry.width && *entry.width != chip.image.width()) || (entry.height && *entry.height != chip.image.height())) {
      report.errors.push_back({entry.id, entry.path, "METADATA_MISMATCH",
                               "declared " + std::to_string(entry.width.value_or(0)) + "x" +
                                   std::to_string(entry.height.value_or(0)) + ", decoded " +
                                   std::to_string(chip.image.width()) + "x" + std::to_string(chip.image.height())});
      continue;
    }
    if (chip.image.min() < 0.0) {
      report.errors.push_back({entry.id, entry.path, "UNDECODABLE", "linear intensity must be non-negative"});
      continue;
    }
    chip.id = entry.id;
    chip.site = entry.site;
    chip.range_m = entry.range_m;
    chip.qc_flags = entry.qc_flags;

    const double extent_w = static_cast<double>(chip.image.width()) * manifest.meters_per_pixel;
    const double extent_h = static_cast<double>(chip.image.height()) * manifest.meters_per_pixel;
    if (std::abs(extent_w - 10.0) > manifest.meters_per_pixel || std::abs(extent_h - 10.0) > manifest.meters_per_pixel) {
      report.warnings.push_back(chip.id + ": extent " + std::to_string(extent_w) + " m x " + std::to_string(extent_h) +
                                " m is not a 10 m chip");
    }

    auto reasons = qc_rejections(chip);
    if (reasons.empty()) {
      report.accepted.push_back(std::move(chip));
    } else {
      report.rejected.push_back({chip.id, std::move(reasons)});
    }
  }
  std::sort(report.accepted.begin(), report.accepted.end(),
            [](const ImageChip& a, const ImageChip& b) { return a.id < b.id; });
  return report;
}

void save_dataset(const fs::path& root, const std::vector<ImageChip>& chips, double meters_per_pixel,
                  std::string notes) {
  fs::create_directories(root / "chips");
  DatasetManifest manifest;
  manifest.meters_per_pixel = meters_per_pixel;
  manifest.created = utc_now_iso();
  manifest.notes = std::move(notes);
  for (const auto& chip : chips) {
    ManifestEntry e;
    e.id = chip.id;
    e.path = "chips/" + chip.id + ".tif";
    e.site = chip.site;
    e.range_m = chip.range_m;
    e.qc_flags = chip.qc_flags;
    e.width = chip.image.width();
    e.height = chip.image.height();
    write_tiff_float32(root / e.path, chip.image);
    manifest.chips.push_back(std::move(e));
  }
  write_manifest(root, manifest);
}

std::uint64_t count_possible_pairs(std::uint64_t n_images) {
  if (n_images < 2) throw InvalidArgument("need at least two images to form a pair");
  return n_images * (n_images - 1) / 2;
}

MetricVector compute_metric_vector(const ImageChip& chip, const MetricConfig& cfg) {
  return compute_metric_vector(chip.image, cfg);
}

}  // namespace sasc
