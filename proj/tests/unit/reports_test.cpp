#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sasc/errors.hpp"
#include "sasc/rating_service.hpp"
#include "sasc/reports.hpp"
#include "sasc/synth.hpp"

using namespace sasc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void save_small_dataset(const fs::path& root) {
  std::vector<ImageChip> chips;
  for (int i = 0; i < 3; ++i) {
    auto c = synthesize_chip(i == 1 ? TextureKind{Ripples{}} : TextureKind{FlatSpeckle{}}, 64, 0.05, i);
    c.id = "chip" + std::to_string(i);
    c.site = i == 2 ? "B" : "A";
    chips.push_back(c);
  }
  chips.push_back({"flat", Image2D(64, 64, 0.05, 1.0), "B", 20.0, {}});
  save_dataset(root, chips, 0.05);
}

}  // namespace

TEST(Csv, FormatAndRoundTrip) {
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_real(1016), "1016");
  testutil::TempDir dir;
  CsvTable t{{"a", "b"}, {{"1", "x,y"}, {"quote\"d", ""}}};
  write_csv(dir / "t.csv", t);
  const auto back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW(back.column("c"), DataError);
}

TEST(Svg, ScatterHasPointsAndLine) {
  ScatterSeries s{{1, 2, 3}, {2, 4, 7}, std::nullopt};
  s.fit = linear_regression(s.x, s.y, "m");
  const auto svg = svg_scatter(s, "t", "x", "y <units>");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t circles = 0;
  for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 3u);
  EXPECT_NE(svg.find("<line"), std::string::npos);
  EXPECT_NE(svg.find("&lt;units&gt;"), std::string::npos);
}

TEST(CmdMetrics, RowsReasonsAndDeterminism) {
  testutil::TempDir dir;
  save_small_dataset(dir / "ds");
  std::ostringstream diag;
  MetricConfig cfg;
  cfg.sobel_kernel_m = 0.5;
  cfg.median_kernel_px = 5;
  const auto s = cmd_metrics(dir / "ds", cfg, dir / "m1", 2, diag);
  EXPECT_EQ(s.rows, 4u);
  const auto t = read_csv(dir / "m1" / "metrics.csv");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.header.size(), 8u);
  const auto& flat = t.rows[3];
  EXPECT_EQ(flat[0], "flat");
  EXPECT_EQ(flat[t.column("lacunarity")], "");
  EXPECT_NE(flat[t.column("reason")].find("UNDEFINED_LACUNARITY"), std::string::npos);
  EXPECT_EQ(flat[t.column("edge_intensity")], "0");

  cmd_metrics(dir / "ds", cfg, dir / "m2", 1, diag);
  EXPECT_EQ(slurp(dir / "m1" / "metrics.csv"), slurp(dir / "m2" / "metrics.csv"));
  const auto side = nlohmann::json::parse(slurp(dir / "m1" / "metrics.config.json"));
  EXPECT_EQ(side.at("metric_config").at("sobel_kernel_m"), 0.5);
}

TEST(CmdRank, EmptyLogFlatRatings) {
  testutil::TempDir dir;
  save_small_dataset(dir / "ds");
  std::ofstream(dir / "log.jsonl").close();
  std::ostringstream diag;
  EloConfig cfg;
  cfg.num_replications = 10;
  const auto r = cmd_rank(dir / "log.jsonl", dir / "ds", cfg, dir / "out", diag);
  for (const auto& img : r.images) EXPECT_EQ(img.mean_rating, 1000.0);
  const auto t = read_csv(dir / "out" / "elo.csv");
  EXPECT_EQ(t.rows.size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "out" / "rank.svg"));
  EXPECT_TRUE(fs::exists(dir / "out" / "sites.svg"));
  EXPECT_EQ(read_csv(dir / "out" / "sites.csv").rows.size(), 2u);
}

TEST(CmdRank, UnknownReferencesItemized) {
  testutil::TempDir dir;
  save_small_dataset(dir / "ds");
  write_log(dir / "log.jsonl", {{"c1", "chip0", "stranger", Outcome::LeftMoreComplex, "op", 1, std::nullopt}});
  std::ostringstream diag;
  EXPECT_THROW(cmd_rank(dir / "log.jsonl", dir / "ds", EloConfig{}, dir / "out", diag), ReferentialIntegrityError);
  EXPECT_NE(diag.str().find("stranger"), std::string::npos);
}

TEST(CmdRank, FixedSeedRerunIdentical) {
  testutil::TempDir dir;
  SimulationConfig sim;
  sim.n_images = 15;
  sim.n_comparisons = 400;
  sim.seed = 2;
  write_log(dir / "log.jsonl", simulate_judgments(sim).comparisons);
  std::ostringstream diag;
  EloConfig cfg;
  cfg.num_replications = 50;
  cfg.seed = 5;
  cmd_rank(dir / "log.jsonl", std::nullopt, cfg, dir / "a", diag);
  cfg.num_workers = 3;
  cmd_rank(dir / "log.jsonl", std::nullopt, cfg, dir / "b", diag);
  EXPECT_EQ(slurp(dir / "a" / "elo.csv"), slurp(dir / "b" / "elo.csv"));
}

TEST(CmdAnalyze, PerfectLinearMetricAndFiveRows) {
  testutil::TempDir dir;
  CsvTable elo{{"rank", "id", "site", "mean_rating"}, {}};
  CsvTable metrics{{"id", "site", "lacunarity", "edge_intensity", "entropy", "compression_ratio",
                    "compression_ratio_rmse", "reason"},
                   {}};
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 117; ++i) {
    const double r = 800 + 4.1 * i;
    const std::string id = "i" + std::to_string(i);
    elo.rows.push_back({std::to_string(i + 1), id, "A", format_real(r)});
    metrics.rows.push_back({id, "A", format_real(2 * r + 1), format_real(u(gen)), i == 3 ? "" : format_real(u(gen)),
                            "", "1", ""});
  }
  write_csv(dir / "elo.csv", elo);
  write_csv(dir / "metrics.csv", metrics);
  std::ostringstream diag;
  const auto fits = cmd_analyze(dir / "metrics.csv", dir / "elo.csv", dir / "out", diag);
  const auto t = read_csv(dir / "out" / "regression.csv");
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_NEAR(std::stod(t.rows[0][t.column("r_squared")]), 1.0, 1e-9);
  EXPECT_NEAR(std::stod(t.rows[0][t.column("slope")]), 2.0, 1e-7);
  EXPECT_LT(std::stod(t.rows[1][t.column("r_squared")]), 0.1);  // noise
  EXPECT_EQ(t.rows[2][t.column("n")], "116");
  EXPECT_EQ(t.rows[3][t.column("reason")], "INSUFFICIENT_DATA");
  EXPECT_EQ(t.rows[4][t.column("r_squared")], "0");  // constant metric
  for (const auto* m : kMetricColumns) EXPECT_TRUE(fs::exists(dir / "out" / (std::string("scatter_") + m + ".svg")));
  EXPECT_EQ(fits.size(), 4u);
}

TEST(CmdAnalyze, JoinTooSmall) {
  testutil::TempDir dir;
  write_csv(dir / "elo.csv", {{"id", "mean_rating"}, {{"a", "1000"}}});
  write_csv(dir / "m.csv", {{"id", "lacunarity", "edge_intensity", "entropy", "compression_ratio",
                             "compression_ratio_rmse"},
                            {{"a", "1", "1", "1", "1", "1"}, {"b", "1", "1", "1", "1", "1"}}});
  std::ostringstream diag;
  EXPECT_THROW(cmd_analyze(dir / "m.csv", dir / "elo.csv", dir / "out", diag), InsufficientData);
}

TEST(CmdConsistency, FlagsOperators) {
  testutil::TempDir dir;
  std::vector<Comparison> log{{"1", "a", "b", Outcome::LeftMoreComplex, "solo", 1, std::nullopt},
                              {"2", "b", "c", Outcome::LeftMoreComplex, "solo", 2, std::nullopt}};
  write_log(dir / "log.jsonl", log);
  std::ostringstream diag;
  auto m = cmd_consistency(dir / "log.jsonl", dir / "out", 0.5, diag);
  auto t = read_csv(dir / "out" / "consistency.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][t.column("status")], "INSUFFICIENT_REPEATS");
  EXPECT_EQ(t.rows[0][t.column("solo")], "");

  // Repeats that contradict the originals.
  log.push_back({"3", "b", "a", Outcome::LeftMoreComplex, "solo", 3, "1"});
  log.push_back({"4", "c", "b", Outcome::RightMoreComplex, "solo", 4, "2"});
  log.push_back({"5", "a", "c", Outcome::RightMoreComplex, "solo", 5, std::nullopt});
  log.push_back({"6", "c", "a", Outcome::RightMoreComplex, "solo", 6, "5"});
  write_log(dir / "log.jsonl", log);
  m = cmd_consistency(dir / "log.jsonl", dir / "out", 0.5, diag);
  t = read_csv(dir / "out" / "consistency.csv");
  EXPECT_EQ(t.rows[0][t.column("status")], "EXCLUDED");
  EXPECT_EQ(read_csv(dir / "out" / "consistency_counts.csv").rows[0][1], "3");
}

TEST(CmdSimulate, WritesLogAndTruth) {
  testutil::TempDir dir;
  SimulateOptions opt;
  opt.sim.n_images = 10;
  opt.sim.n_comparisons = 50;
  opt.sim.seed = 1;
  std::ostringstream diag;
  const auto log = cmd_simulate(opt, dir.path(), diag);
  EXPECT_EQ(replay_log(dir / "judgments.jsonl").records, log.comparisons);
  EXPECT_EQ(read_csv(dir / "ground_truth.csv").rows.size(), 10u);
  EXPECT_TRUE(fs::exists(dir / "simulate.config.json"));
  opt.latent_from_metric = "entropy";
  EXPECT_THROW(cmd_simulate(opt, dir.path(), diag), InvalidArgument);
}

TEST(SiteChips, FiveSitesDeterministic) {
  const auto a = synthesize_site_chips(10, 48, 0.1, 3), b = synthesize_site_chips(10, 48, 0.1, 3);
  ASSERT_EQ(a.size(), 10u);
  std::set<std::string> sites;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_GE(a[i].range_m, kMinRangeM);
    EXPECT_LE(a[i].range_m, kMaxRangeM);
    sites.insert(a[i].site);
  }
  EXPECT_EQ(sites.size(), 5u);
}
