// sasc: seabed image complexity pipeline.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 runtime error.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "sasc/dataset.hpp"
#include "sasc/errors.hpp"
#include "sasc/http_api.hpp"
#include "sasc/rating_service.hpp"
#include "sasc/reports.hpp"

namespace fs = std::filesystem;
using namespace sasc;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned workers = 0;
};

int run_ingest_check(const std::string& root) {
  const auto report = load_dataset(root);
  std::cout << "accepted " << report.accepted.size() << ", rejected " << report.rejected.size() << ", errors "
            << report.errors.size() << "\n";
  for (const auto& r : report.rejected) {
    for (const auto& why : r.reasons) std::cout << "rejected " << r.id << ": " << why << "\n";
  }
  for (const auto& e : report.errors) std::cout << "error [" << e.kind << "] " << e.id << ": " << e.detail << "\n";
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  if (report.accepted.size() >= 2) {
    std::cout << "possible pairs " << count_possible_pairs(report.accepted.size()) << "\n";
  }
  return report.ok() ? kOk : kData;
}

int run_serve(const std::string& root, const std::string& host, int port, const fs::path& log_path,
              const ServiceConfig& service_cfg, const std::string& static_dir) {
  // Block termination signals before any thread starts; a dedicated thread
  // waits for them and stops the server.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const auto report = load_dataset(root);
  for (const auto& e : report.errors) std::cerr << "load error [" << e.kind << "] " << e.id << ": " << e.detail << "\n";
  if (!report.ok()) throw DataError("dataset failed to load cleanly");

  std::vector<ImageId> ids;
  std::map<ImageId, Image2D> images;
  for (const auto& chip : report.accepted) {
    ids.push_back(chip.id);
    images.emplace(chip.id, chip.image);
  }
  if (!log_path.parent_path().empty()) fs::create_directories(log_path.parent_path());
  RatingService service(ids, log_path, service_cfg);
  RatingHttpServer server(service, std::move(images), service_cfg.seed, static_dir);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return kRuntime;
  }
  std::cerr << "serving " << ids.size() << " images on http://" << host << ":" << bound << "\n";

  std::thread waiter([&server, set] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.listen_after_bind();
  // listen can also return on its own; make sure the waiter wakes up.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  const auto stats = service.progress_stats();
  std::cerr << "stopped; " << stats.total << " judgments in " << log_path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seabed image complexity: metrics, Elo ranking, analysis and the rating service"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values (sections per subcommand)");
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->envname("SASC_SEED")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->envname("SASC_OUT")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  // ingest-check
  std::string ingest_root;
  auto* ingest = app.add_subcommand("ingest-check", "Load a dataset and itemize rejections and errors");
  ingest->add_option("dataset", ingest_root, "Dataset root containing manifest.json")->required();

  // metrics
  std::string metrics_root;
  MetricConfig mcfg;
  std::string colormap = "grayscale";
  auto* metrics = app.add_subcommand("metrics", "Compute the five complexity metrics per chip");
  metrics->add_option("dataset", metrics_root, "Dataset root")->required();
  auto add_metric_options = [&](CLI::App* sub) {
    sub->add_option("--drc-epsilon", mcfg.drc_epsilon)->capture_default_str();
    sub->add_option("--lacunarity-box-m", mcfg.lacunarity_box_m)->capture_default_str();
    sub->add_option("--sobel-kernel-m", mcfg.sobel_kernel_m)->capture_default_str();
    sub->add_option("--entropy-bins", mcfg.entropy_bins)->capture_default_str();
    sub->add_option("--median-kernel-px", mcfg.median_kernel_px)->capture_default_str();
    sub->add_option("--jpeg-quality", mcfg.jpeg_quality)->capture_default_str();
    sub->add_option("--colormap", colormap, "grayscale, jet or hot")->capture_default_str();
  };
  add_metric_options(metrics);

  // rank
  std::string rank_log, rank_dataset;
  EloConfig ecfg;
  auto* rank = app.add_subcommand("rank", "Replicated Elo ranking of a judgment log");
  rank->add_option("log", rank_log, "Judgment log (JSON lines)")->required();
  rank->add_option("--dataset", rank_dataset, "Dataset root; supplies the image set and sites");
  rank->add_option("--k-factor", ecfg.k_factor)->capture_default_str();
  rank->add_option("--initial-rating", ecfg.initial_rating)->capture_default_str();
  rank->add_option("--replications", ecfg.num_replications)->capture_default_str();
  rank->add_option("--ci-level", ecfg.ci_level)->capture_default_str();

  // analyze
  std::string analyze_metrics, analyze_elo;
  auto* analyze = app.add_subcommand("analyze", "Regress each metric against mean Elo rating");
  analyze->add_option("metrics_csv", analyze_metrics)->required();
  analyze->add_option("elo_csv", analyze_elo)->required();

  // consistency
  std::string consistency_log;
  double exclude_below = 0.5;
  auto* consistency = app.add_subcommand("consistency", "Operator agreement and self-consistency matrix");
  consistency->add_option("log", consistency_log)->required();
  consistency->add_option("--exclude-below", exclude_below, "Self-consistency threshold")->capture_default_str();

  // simulate
  SimulateOptions sopt;
  std::size_t n_raters = sopt.sim.raters.size();
  RaterModel rater_template = sopt.sim.raters.front();
  auto* simulate = app.add_subcommand("simulate", "Synthetic judgment log from simulated raters");
  simulate->add_option("--images", sopt.sim.n_images)->capture_default_str();
  simulate->add_option("--comparisons", sopt.sim.n_comparisons)->capture_default_str();
  simulate->add_option("--raters", n_raters)->capture_default_str();
  simulate->add_option("--noise", rater_template.noise_scale, "Logistic scale; 0 = deterministic")
      ->capture_default_str();
  simulate->add_option("--bias", rater_template.bias)->capture_default_str();
  simulate->add_option("--neutral-band", rater_template.neutral_band)->capture_default_str();
  simulate->add_option("--latent-center", sopt.sim.latent_center)->capture_default_str();
  simulate->add_option("--latent-spread", sopt.sim.latent_spread)->capture_default_str();
  simulate->add_option("--p-repeat", sopt.sim.p_repeat)->capture_default_str();
  simulate->add_flag("--with-chips", sopt.with_chips, "Also synthesize a five-site chip dataset");
  simulate->add_option("--chip-size", sopt.chip_size_px)->capture_default_str();
  simulate->add_option("--meters-per-pixel", sopt.meters_per_pixel)->capture_default_str();
  simulate->add_option("--latent-from-metric", sopt.latent_from_metric, "Latent proportional to this chip metric");
  add_metric_options(simulate);

  // serve
  std::string serve_root, host = "127.0.0.1", log_file, static_dir;
  int port = 8080;
  ServiceConfig scfg;
  auto* serve = app.add_subcommand("serve", "Run the rating service");
  serve->add_option("dataset", serve_root)->required()->envname("SASC_DATASET");
  serve->add_option("--host", host)->envname("SASC_HOST")->capture_default_str();
  serve->add_option("--port", port)->envname("SASC_PORT")->capture_default_str();
  serve->add_option("--log", log_file, "Judgment log (default <out>/judgments.jsonl)")->envname("SASC_LOG");
  serve->add_option("--p-repeat", scfg.p_repeat)->envname("SASC_P_REPEAT")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Web client assets served at /")->envname("SASC_STATIC_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const fs::path out = g.out;
    if (*ingest) return run_ingest_check(ingest_root);
    if (*metrics || *simulate) mcfg.colormap = parse_colormap(colormap);
    if (*metrics) {
      const auto s = cmd_metrics(metrics_root, mcfg, out, g.workers, std::cerr);
      std::cerr << s.rows << " rows, " << s.rejected << " rejected, " << s.load_errors << " load errors\n";
      return s.load_errors ? kData : kOk;
    }
    if (*rank) {
      ecfg.seed = g.seed;
      ecfg.num_workers = g.workers;
      std::optional<fs::path> ds;
      if (!rank_dataset.empty()) ds = rank_dataset;
      const auto r = cmd_rank(rank_log, ds, ecfg, out, std::cerr);
      std::cerr << r.images.size() << " images ranked\n";
      return kOk;
    }
    if (*analyze) {
      for (const auto& fit : cmd_analyze(analyze_metrics, analyze_elo, out, std::cerr)) {
        std::printf("%-24s R2=%.4f slope=%.6g n=%zu\n", fit.metric_name.c_str(), fit.r_squared, fit.slope, fit.n);
      }
      return kOk;
    }
    if (*consistency) {
      const auto m = cmd_consistency(consistency_log, out, exclude_below, std::cerr);
      std::cerr << m.size() << " operators\n";
      return kOk;
    }
    if (*simulate) {
      sopt.sim.seed = g.seed;
      sopt.sim.raters.clear();
      for (std::size_t i = 0; i < n_raters; ++i) {
        RaterModel r = rater_template;
        r.id = "op" + std::to_string(i + 1);
        sopt.sim.raters.push_back(r);
      }
      sopt.metric_cfg = mcfg;
      const auto log = cmd_simulate(sopt, out, std::cerr);
      std::cerr << log.comparisons.size() << " judgments over " << log.image_ids.size() << " images\n";
      return kOk;
    }
    if (*serve) {
      scfg.seed = g.seed;
      scfg.validate();
      const fs::path log_path = log_file.empty() ? out / "judgments.jsonl" : fs::path(log_file);
      return run_serve(serve_root, host, port, log_path, scfg, static_dir);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
