#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sasc/codec.hpp"
#include "sasc/dataset.hpp"
#include "sasc/errors.hpp"
#include "sasc/metrics.hpp"
#include "sasc/synth.hpp"

using namespace sasc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

ImageChip chip(const std::string& id, double range, std::size_t n = 20) {
  ImageChip c = synthesize_chip(FlatSpeckle{}, std::max<std::size_t>(n, 32), 0.5, 1);
  c.id = id;
  c.site = "A";
  c.range_m = range;
  return c;
}

}  // namespace

TEST(CountPossiblePairs, Values) {
  EXPECT_EQ(count_possible_pairs(117), 6786u);
  EXPECT_EQ(count_possible_pairs(2), 1u);
  EXPECT_EQ(count_possible_pairs(3), 3u);
  EXPECT_THROW(count_possible_pairs(1), InvalidArgument);
}

TEST(QcFlags, NamesRoundTrip) {
  for (auto f : {QcFlag::Crosstalk, QcFlag::UncompensatedMotion, QcFlag::NoSpectralSupport, QcFlag::ManualExclude}) {
    EXPECT_EQ(parse_qc_flag(to_string(f)), f);
  }
  EXPECT_THROW(parse_qc_flag("GLITCH"), InvalidArgument);
}

TEST(QcRejections, RangeAndFlags) {
  ImageChip c = chip("x", 45);
  EXPECT_EQ(qc_rejections(c), std::vector<std::string>{"RANGE_OUT_OF_BOUNDS"});
  c.range_m = 10;
  EXPECT_TRUE(qc_rejections(c).empty());
  c.range_m = 40;
  c.qc_flags.insert(QcFlag::Crosstalk);
  EXPECT_EQ(qc_rejections(c), std::vector<std::string>{"CROSSTALK"});
}

TEST(LoadDataset, EmptyManifest) {
  testutil::TempDir dir;
  write(dir / "manifest.json", {{"meters_per_pixel", 0.05}, {"chips", json::array()}});
  const auto r = load_dataset(dir.path());
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_TRUE(r.ok());
}

TEST(LoadDataset, MissingOrBadManifest) {
  testutil::TempDir dir;
  EXPECT_THROW(load_dataset(dir.path()), DataError);
  write(dir / "manifest.json", {{"chips", json::array()}});
  EXPECT_THROW(load_dataset(dir.path()), DataError);
  std::ofstream(dir / "manifest.json") << "{not json";
  EXPECT_THROW(load_dataset(dir.path()), DataError);
}

TEST(LoadDataset, SaveLoadRoundTripAndQc) {
  testutil::TempDir dir;
  std::vector<ImageChip> chips{chip("b", 25), chip("a", 12), chip("far", 45)};
  chips[1].qc_flags.insert(QcFlag::UncompensatedMotion);
  save_dataset(dir.path(), chips, 0.5, "unit");
  const auto r = load_dataset(dir.path());
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.accepted.size(), 1u);
  EXPECT_EQ(r.accepted[0].id, "b");
  for (std::size_t i = 0; i < chips[0].image.size(); ++i) {
    ASSERT_EQ(r.accepted[0].image.values()[i], static_cast<float>(chips[0].image.values()[i]));
  }
  ASSERT_EQ(r.rejected.size(), 2u);
  std::map<std::string, std::vector<std::string>> why;
  for (const auto& x : r.rejected) why[x.id] = x.reasons;
  EXPECT_EQ(why["far"], std::vector<std::string>{"RANGE_OUT_OF_BOUNDS"});
  EXPECT_EQ(why["a"], std::vector<std::string>{"UNCOMPENSATED_MOTION"});
  EXPECT_EQ(r.meters_per_pixel, 0.5);
}

TEST(LoadDataset, ItemizedErrors) {
  testutil::TempDir dir;
  save_dataset(dir.path(), {chip("ok", 20), chip("dup", 20)}, 0.5);
  auto m = read_manifest(dir.path());
  m.chips.push_back({"ghost", "chips/ghost.tif", "A", 20, {}, std::nullopt, std::nullopt});
  m.chips.push_back(m.chips[0]);  // duplicate id
  std::ofstream(dir / "chips" / "junk.tif") << "not a tiff";
  m.chips.push_back({"junk", "chips/junk.tif", "A", 20, {}, std::nullopt, std::nullopt});
  ManifestEntry wrong = m.chips[1];
  wrong.id = "wrong";
  wrong.width = 7;
  m.chips.push_back(wrong);
  write_manifest(dir.path(), m);

  const auto r = load_dataset(dir.path());
  std::map<std::string, std::string> kind;
  for (const auto& e : r.errors) kind[e.id] = e.kind;
  EXPECT_EQ(kind["ghost"], "MISSING_FILE");
  EXPECT_EQ(kind["junk"], "UNDECODABLE");
  EXPECT_EQ(kind["wrong"], "METADATA_MISMATCH");
  EXPECT_EQ(kind[m.chips[0].id], "DUPLICATE_ID");
  EXPECT_EQ(r.accepted.size(), 2u);
}

TEST(LoadDataset, SidecarOverridesManifest) {
  testutil::TempDir dir;
  save_dataset(dir.path(), {chip("s1", 20)}, 0.5);
  write(dir / "chips" / "s1.meta.json", {{"range_m", 41.0}, {"site", "E"}});
  auto r = load_dataset(dir.path());
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reasons, std::vector<std::string>{"RANGE_OUT_OF_BOUNDS"});

  write(dir / "chips" / "s1.meta.json", {{"range_m", 30.0}, {"site", "E"}, {"qc_flags", {"CROSSTALK"}}});
  r = load_dataset(dir.path());
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reasons, std::vector<std::string>{"CROSSTALK"});

  std::ofstream(dir / "chips" / "s1.meta.json") << "[";
  r = load_dataset(dir.path());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].kind, "BAD_SIDECAR");
}

TEST(LoadDataset, PngRastersAccepted) {
  testutil::TempDir dir;
  fs::create_directories(dir / "img");
  std::mt19937_64 gen(31);
  write_png_gray16(dir / "img" / "p.png", oracle::random_image(gen, 200, 200));
  write(dir / "manifest.json",
        {{"meters_per_pixel", 0.05},
         {"chips", {{{"id", "p"}, {"path", "img/p.png"}, {"site", "C"}, {"range_m", 22.5}, {"qc_flags", json::array()}}}}});
  const auto r = load_dataset(dir.path());
  ASSERT_EQ(r.accepted.size(), 1u);
  EXPECT_EQ(r.accepted[0].site, "C");
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.accepted[0].image.meters_per_pixel(), 0.05);
}

TEST(LoadDataset, ExtentWarning) {
  testutil::TempDir dir;
  save_dataset(dir.path(), {chip("w", 20)}, 0.5);  // 32 px * 0.5 m = 16 m
  const auto r = load_dataset(dir.path());
  EXPECT_EQ(r.accepted.size(), 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Synth, DeterministicAndPositive) {
  const std::vector<TextureKind> kinds{FlatSpeckle{}, Ripples{}, Clutter{}, Bioturbation{}, Mixed{}};
  for (const auto& k : kinds) {
    const auto a = synthesize_chip(k, 64, 0.05, 17), b = synthesize_chip(k, 64, 0.05, 17);
    EXPECT_EQ(a.image, b.image) << texture_name(k);
    EXPECT_NE(a.image, synthesize_chip(k, 64, 0.05, 18).image) << texture_name(k);
    EXPECT_GT(a.image.min(), 0.0) << texture_name(k);
    EXPECT_EQ(a.image.width(), 64u);
    EXPECT_EQ(a.image.meters_per_pixel(), 0.05);
  }
}

TEST(Synth, InvalidParameters) {
  EXPECT_THROW(synthesize_chip(FlatSpeckle{}, 31, 0.05, 1), InvalidArgument);
  EXPECT_THROW(synthesize_chip(Ripples{0.05, 0, 0.5}, 64, 0.05, 1), InvalidArgument);
  EXPECT_THROW(synthesize_chip(Ripples{1.0, 0, 1.0}, 64, 0.05, 1), InvalidArgument);
  EXPECT_THROW(synthesize_chip(FlatSpeckle{}, 64, 0.0, 1), InvalidArgument);
}

TEST(Synth, RipplesHaveMoreEdgeThanFlat) {
  const MetricConfig cfg;
  const auto flat = compute_metric_vector(synthesize_chip(FlatSpeckle{}, 200, 0.05, 5), cfg);
  const auto ripple = compute_metric_vector(synthesize_chip(Ripples{}, 200, 0.05, 5), cfg);
  EXPECT_GT(*ripple.edge_intensity, *flat.edge_intensity);
}
