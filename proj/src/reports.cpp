#include "sasc/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sasc/dataset.hpp"
#include "sasc/errors.hpp"
#include "sasc/rating_service.hpp"
#include "sasc/synth.hpp"

namespace sasc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw DataError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

json to_json(const EloConfig& c) {
  return {{"k_factor", c.k_factor},
          {"initial_rating", c.initial_rating},
          {"logistic_scale", c.logistic_scale},
          {"num_replications", c.num_replications},
          {"seed", c.seed},
          {"ci_level", c.ci_level}};
}

json to_json(const MetricConfig& c) {
  return {{"drc_epsilon", c.drc_epsilon},           {"lacunarity_box_m", c.lacunarity_box_m},
          {"sobel_kernel_m", c.sobel_kernel_m},     {"entropy_bins", c.entropy_bins},
          {"median_kernel_px", c.median_kernel_px}, {"jpeg_quality", c.jpeg_quality},
          {"colormap", std::string(to_string(c.colormap))}};
}

json to_json(const SimulationConfig& c) {
  json raters = json::array();
  for (const auto& r : c.raters) {
    raters.push_back({{"id", r.id}, {"noise_scale", r.noise_scale}, {"bias", r.bias}, {"neutral_band", r.neutral_band}});
  }
  return {{"n_images", c.n_images},         {"n_comparisons", c.n_comparisons}, {"raters", raters},
          {"latent_center", c.latent_center}, {"latent_spread", c.latent_spread}, {"p_repeat", c.p_repeat},
          {"seed", c.seed},                 {"start_ms", c.start_ms},           {"step_ms", c.step_ms}};
}

std::optional<double> metric_field(const MetricVector& mv, std::string_view name) {
  if (name == "lacunarity") return mv.lacunarity;
  if (name == "edge_intensity") return mv.edge_intensity;
  if (name == "entropy") return mv.entropy;
  if (name == "compression_ratio") return mv.compression_ratio;
  if (name == "compression_ratio_rmse") return mv.compression_ratio_rmse;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

std::vector<MetricVector> compute_all(const std::vector<ImageChip>& chips, const MetricConfig& cfg, unsigned workers) {
  std::vector<MetricVector> out(chips.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(chips.size(), 1)));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < chips.size(); i += workers) out[i] = compute_metric_vector(chips[i], cfg);
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse " + what + " value '" + s + "'");
  }
}

// Plot frame shared by all SVGs: maps data ranges onto a fixed canvas.
struct Frame {
  static constexpr double kWidth = 720, kHeight = 480, kLeft = 80, kRight = 24, kTop = 40, kBottom = 60;
  double x0, x1, y0, y1;

  Frame(double xmin, double xmax, double ymin, double ymax) {
    auto widen = [](double& lo, double& hi) {
      if (hi <= lo) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
        lo -= pad;
        hi += pad;
      } else {
        const double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
      }
    };
    widen(xmin, xmax);
    widen(ymin, ymax);
    x0 = xmin, x1 = xmax, y0 = ymin, y1 = ymax;
  }
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }

  std::string open(const std::string& title, const std::string& x_label, const std::string& y_label) const {
    std::ostringstream s;
    char buf[256];
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
    s << buf;
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
      std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.4g</text>\n", px(xv),
                    kHeight - kBottom + 18, xv);
      s << buf;
      std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.4g</text>\n", kLeft - 6,
                    py(yv) + 4, yv);
      s << buf;
    }
    s << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
    s << "<text transform=\"translate(20," << (kTop + kHeight - kBottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
    return s.str();
  }
};

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("CSV lacks column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ostringstream s;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << csv_escape(row[i]);
    s << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  write_text(path, s.str());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = csv_split(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataError(path.string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (first) throw DataError(path.string() + ": empty CSV");
  return t;
}

std::string svg_scatter(const ScatterSeries& s, const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!s.x.empty()) {
    std::tie(xmin, xmax) = std::pair{*std::min_element(s.x.begin(), s.x.end()), *std::max_element(s.x.begin(), s.x.end())};
    std::tie(ymin, ymax) = std::pair{*std::min_element(s.y.begin(), s.y.end()), *std::max_element(s.y.begin(), s.y.end())};
  }
  const Frame f(xmin, xmax, ymin, ymax);
  std::ostringstream out;
  out << f.open(title, x_label, y_label);
  char buf[200];
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n",
                  f.px(s.x[i]), f.py(s.y[i]));
    out << buf;
  }
  if (s.fit) {
    auto line_y = [&](double x) { return s.fit->intercept + s.fit->slope * x; };
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"firebrick\" stroke-width=\"2\"/>\n",
                  f.px(xmin), f.py(line_y(xmin)), f.px(xmax), f.py(line_y(xmax)));
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">R² = %.3f, n = %zu</text>\n", Frame::kLeft + 10,
                  Frame::kTop + 18, s.fit->r_squared, s.fit->n);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_rank_plot(const std::vector<RankedImage>& ranked, const std::string& title) {
  double ymin = 0, ymax = 1;
  if (!ranked.empty()) {
    ymin = ranked.front().ci_low;
    ymax = ranked.front().ci_high;
    for (const auto& r : ranked) {
      ymin = std::min(ymin, r.ci_low);
      ymax = std::max(ymax, r.ci_high);
    }
  }
  const Frame f(1.0, std::max<double>(1.0, static_cast<double>(ranked.size())), ymin, ymax);
  std::ostringstream out;
  out << f.open(title, "rank", "mean Elo rating");
  char buf[220];
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const double x = f.px(static_cast<double>(i + 1));
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\"/>"
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"black\"/>\n",
                  x, f.py(ranked[i].ci_low), x, f.py(ranked[i].ci_high), x, f.py(ranked[i].mean));
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_box_plot(const std::vector<SiteSummary>& sites, const std::string& title) {
  double ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : sites) {
    double lo = s.whisker_low, hi = s.whisker_high;
    for (const auto& o : s.outliers) {
      lo = std::min(lo, o.second);
      hi = std::max(hi, o.second);
    }
    ymin = first ? lo : std::min(ymin, lo);
    ymax = first ? hi : std::max(ymax, hi);
    first = false;
  }
  const Frame f(0.5, static_cast<double>(std::max<std::size_t>(sites.size(), 1)) + 0.5, ymin, ymax);
  std::ostringstream out;
  out << f.open(title, "site", "mean Elo rating");
  char buf[400];
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = sites[i];
    const double cx = f.px(static_cast<double>(i + 1));
    const double half = 18.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n"
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"lightsteelblue\" stroke=\"black\"/>\n"
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\" stroke-width=\"2\"/>\n",
                  cx, f.py(s.whisker_low), cx, f.py(s.whisker_high), cx - half, f.py(s.q3), 2 * half,
                  std::max(0.5, f.py(s.q1) - f.py(s.q3)), cx - half, f.py(s.median), cx + half, f.py(s.median));
    out << buf;
    for (const auto& o : s.outliers) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"none\" stroke=\"firebrick\"/>\n",
                    cx, f.py(o.second));
      out << buf;
    }
    out << "<text x=\"" << cx << "\" y=\"" << Frame::kHeight - Frame::kBottom + 34 << "\" text-anchor=\"middle\">"
        << xml_escape(s.site) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

MetricsSummary cmd_metrics(const fs::path& dataset_root, const MetricConfig& cfg, const fs::path& out_dir,
                           unsigned workers, std::ostream& diag) {
  cfg.validate();
  const LoadReport report = load_dataset(dataset_root);
  for (const auto& e : report.errors) diag << "load error [" << e.kind << "] " << e.id << ": " << e.detail << '\n';
  for (const auto& r : report.rejected) {
    for (const auto& why : r.reasons) diag << "rejected " << r.id << ": " << why << '\n';
  }
  for (const auto& w : report.warnings) diag << "warning: " << w << '\n';

  const auto vectors = compute_all(report.accepted, cfg, workers);
  CsvTable table;
  table.header = {"id", "site"};
  for (const auto* m : kMetricColumns) table.header.emplace_back(m);
  table.header.emplace_back("reason");
  for (std::size_t i = 0; i < report.accepted.size(); ++i) {
    std::vector<std::string> row{report.accepted[i].id, report.accepted[i].site};
    for (const auto* m : kMetricColumns) {
      const auto v = metric_field(vectors[i], m);
      row.push_back(v ? format_real(*v) : "");
    }
    std::string reason;
    for (const auto& f : vectors[i].failures) reason += (reason.empty() ? "" : ";") + f.field + ":" + f.reason;
    row.push_back(reason);
    for (const auto& f : vectors[i].failures) diag << report.accepted[i].id << ": " << f.field << " " << f.reason << '\n';
    table.rows.push_back(std::move(row));
  }

  fs::create_directories(out_dir);
  write_csv(out_dir / "metrics.csv", table);
  json rejected = json::array(), errors = json::array();
  for (const auto& r : report.rejected) rejected.push_back({{"id", r.id}, {"reasons", r.reasons}});
  for (const auto& e : report.errors) {
    errors.push_back({{"id", e.id}, {"path", e.path}, {"kind", e.kind}, {"detail", e.detail}});
  }
  write_json(out_dir / "metrics.config.json", {{"command", "metrics"},
                                               {"dataset_root", dataset_root.string()},
                                               {"meters_per_pixel", report.meters_per_pixel},
                                               {"metric_config", to_json(cfg)},
                                               {"rejected", rejected},
                                               {"load_errors", errors}});
  return {table.rows.size(), report.rejected.size(), report.errors.size()};
}

EloResult cmd_rank(const fs::path& log_path, const std::optional<fs::path>& dataset_root, const EloConfig& cfg,
                   const fs::path& out_dir, std::ostream& diag) {
  cfg.validate();
  const auto replay = replay_log(log_path);
  for (const auto& e : replay.errors) diag << log_path.string() << ":" << e.line << ": " << e.detail << '\n';

  std::vector<ImageId> ids;
  std::map<ImageId, std::string> site_of;
  if (dataset_root) {
    const LoadReport report = load_dataset(*dataset_root);
    for (const auto& e : report.errors) diag << "load error [" << e.kind << "] " << e.id << ": " << e.detail << '\n';
    for (const auto& chip : report.accepted) {
      ids.push_back(chip.id);
      site_of[chip.id] = chip.site;
    }
  } else {
    for (const auto& c : replay.records) {
      site_of.emplace(c.left, "?");
      site_of.emplace(c.right, "?");
    }
    for (const auto& [id, site] : site_of) ids.push_back(id);
  }

  std::size_t missing = 0;
  for (const auto& c : replay.records) {
    for (const auto* id : {&c.left, &c.right}) {
      if (!site_of.count(*id)) {
        diag << "comparison " << c.id << " references unknown image '" << *id << "'\n";
        ++missing;
      }
    }
  }
  if (missing > 0) throw ReferentialIntegrityError(std::to_string(missing) + " references to images outside the dataset");
  if (ids.empty()) throw InsufficientData("no images to rank");

  const EloResult elo = run_replicated(replay.records, ids, cfg);
  const auto ranked = rank_order(elo);
  const auto sites = site_summary(elo, site_of);

  CsvTable table{{"rank", "id", "site", "mean_rating", "std_rating", "ci_low", "ci_high", "comparisons"}, {}};
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto* r = elo.find(ranked[i].id);
    table.rows.push_back({std::to_string(i + 1), r->id, site_of.at(r->id), format_real(r->mean_rating),
                          format_real(r->std_rating), format_real(r->ci_low), format_real(r->ci_high),
                          std::to_string(r->comparisons_count)});
  }
  CsvTable site_table{{"site", "count", "q1", "median", "q3", "whisker_low", "whisker_high", "outliers"}, {}};
  for (const auto& s : sites) {
    std::string outliers;
    for (const auto& [id, score] : s.outliers) outliers += (outliers.empty() ? "" : ";") + id + "=" + format_real(score);
    site_table.rows.push_back({s.site, std::to_string(s.count), format_real(s.q1), format_real(s.median),
                               format_real(s.q3), format_real(s.whisker_low), format_real(s.whisker_high), outliers});
  }

  fs::create_directories(out_dir);
  write_csv(out_dir / "elo.csv", table);
  write_csv(out_dir / "sites.csv", site_table);
  write_text(out_dir / "rank.svg", svg_rank_plot(ranked, "Elo rating in rank order"));
  write_text(out_dir / "sites.svg", svg_box_plot(sites, "Elo rating by site"));
  write_json(out_dir / "elo.config.json", {{"command", "rank"},
                                           {"log", log_path.string()},
                                           {"dataset_root", dataset_root ? dataset_root->string() : ""},
                                           {"elo_config", to_json(cfg)},
                                           {"comparisons", replay.records.size()},
                                           {"log_parse_errors", replay.errors.size()},
                                           {"images", ids.size()}});
  return elo;
}

std::vector<RegressionResult> cmd_analyze(const fs::path& metrics_csv, const fs::path& elo_csv, const fs::path& out_dir,
                                          std::ostream& diag) {
  const CsvTable metrics = read_csv(metrics_csv);
  const CsvTable elo = read_csv(elo_csv);
  const auto elo_id = elo.column("id"), elo_mean = elo.column("mean_rating");
  std::map<std::string, double> rating;
  for (const auto& row : elo.rows) rating[row[elo_id]] = parse_real(row[elo_mean], "mean_rating");

  const auto metric_id = metrics.column("id");
  std::vector<std::size_t> joined;
  for (std::size_t i = 0; i < metrics.rows.size(); ++i) {
    if (rating.count(metrics.rows[i][metric_id])) {
      joined.push_back(i);
    } else {
      diag << "no rating for image '" << metrics.rows[i][metric_id] << "'\n";
    }
  }
  if (joined.size() < 2) throw InsufficientData("metrics and ratings share fewer than two images");

  std::vector<RegressionResult> results;
  CsvTable table{{"metric", "slope", "intercept", "r_squared", "n", "reason"}, {}};
  fs::create_directories(out_dir);
  for (const auto* name : kMetricColumns) {
    const auto col = metrics.column(name);
    ScatterSeries series;
    for (const auto i : joined) {
      const auto& cell = metrics.rows[i][col];
      if (cell.empty()) continue;
      series.x.push_back(rating.at(metrics.rows[i][metric_id]));
      series.y.push_back(parse_real(cell, name));
    }
    if (series.x.size() < 2) {
      diag << name << ": fewer than two values, regression skipped\n";
      table.rows.push_back({name, "", "", "", std::to_string(series.x.size()), "INSUFFICIENT_DATA"});
    } else {
      const auto fit = linear_regression(series.x, series.y, name);
      series.fit = fit;
      results.push_back(fit);
      table.rows.push_back({name, format_real(fit.slope), format_real(fit.intercept), format_real(fit.r_squared),
                            std::to_string(fit.n), ""});
    }
    write_text(out_dir / ("scatter_" + std::string(name) + ".svg"),
               svg_scatter(series, std::string(name) + " against Elo rating", "mean Elo rating", name));
  }
  write_csv(out_dir / "regression.csv", table);
  write_json(out_dir / "regression.config.json",
             {{"command", "analyze"}, {"metrics_csv", metrics_csv.string()}, {"elo_csv", elo_csv.string()},
              {"joined_rows", joined.size()}, {"orientation", "metric ~ intercept + slope * mean_rating"}});
  return results;
}

ConsistencyMatrix cmd_consistency(const fs::path& log_path, const fs::path& out_dir, double exclude_below,
                                  std::ostream& diag) {
  const auto replay = replay_log(log_path);
  for (const auto& e : replay.errors) diag << log_path.string() << ":" << e.line << ": " << e.detail << '\n';
  const auto m = operator_consistency(replay.records);
  const std::size_t n = m.size();

  CsvTable values{{"operator"}, {}}, counts{{"operator"}, {}};
  for (const auto& op : m.operator_ids) {
    values.header.push_back(op);
    counts.header.push_back(op);
  }
  values.header.emplace_back("status");
  json statuses = json::object();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> vrow{m.operator_ids[i]}, crow{m.operator_ids[i]};
    for (std::size_t j = 0; j < n; ++j) {
      const bool upper = j >= i;
      vrow.push_back(upper && m.at(i, j) ? format_real(*m.at(i, j)) : "");
      crow.push_back(upper ? std::to_string(m.count(i, j)) : "");
    }
    std::string status = "OK";
    if (!m.at(i, i)) {
      status = "INSUFFICIENT_REPEATS";
    } else if (*m.at(i, i) < exclude_below) {
      status = "EXCLUDED";
    }
    if (status != "OK") diag << m.operator_ids[i] << ": " << status << '\n';
    statuses[m.operator_ids[i]] = status;
    vrow.push_back(status);
    values.rows.push_back(std::move(vrow));
    counts.rows.push_back(std::move(crow));
  }
  fs::create_directories(out_dir);
  write_csv(out_dir / "consistency.csv", values);
  write_csv(out_dir / "consistency_counts.csv", counts);
  write_json(out_dir / "consistency.config.json", {{"command", "consistency"},
                                                   {"log", log_path.string()},
                                                   {"exclude_below", exclude_below},
                                                   {"status", statuses},
                                                   {"comparisons", replay.records.size()}});
  return m;
}

std::vector<ImageChip> synthesize_site_chips(std::size_t n, std::size_t size_px, double mpp, std::uint64_t seed) {
  static constexpr const char* kSites[] = {"A", "B", "C", "D", "E"};
  std::vector<ImageChip> chips;
  Rng rng(stream_seed(seed, hash_string("site-chips")));
  char id[32];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t site = i % 5;
    TextureKind kind;
    switch (site) {
      case 0:
        kind = rng.bernoulli(0.5) ? TextureKind{FlatSpeckle{}} : TextureKind{Bioturbation{rng.uniform(0.1, 0.8)}};
        break;
      case 1:
        kind = Ripples{rng.uniform(0.8, 1.4), rng.uniform(0.0, M_PI), rng.uniform(0.5, 0.9)};
        break;
      case 2:
        kind = Clutter{static_cast<int>(rng.below(9)) + 1};
        break;
      case 3:
        kind = Mixed{};
        break;
      default:
        kind = Ripples{rng.uniform(0.25, 0.45), rng.uniform(0.0, M_PI), rng.uniform(0.2, 0.6)};
        break;
    }
    ImageChip chip = synthesize_chip(kind, size_px, mpp, rng.next());
    std::snprintf(id, sizeof id, "chip%03zu", i + 1);
    chip.id = id;
    chip.site = kSites[site];
    chip.range_m = rng.uniform(kMinRangeM, kMaxRangeM);
    chips.push_back(std::move(chip));
  }
  return chips;
}

SimulatedLog cmd_simulate(const SimulateOptions& opts, const fs::path& out_dir, std::ostream& diag) {
  opts.sim.validate();
  fs::create_directories(out_dir);
  SimulatedLog log;
  std::map<ImageId, std::string> site_of;

  if (opts.with_chips) {
    const auto chips = synthesize_site_chips(opts.sim.n_images, opts.chip_size_px, opts.meters_per_pixel, opts.sim.seed);
    save_dataset(out_dir / "dataset", chips, opts.meters_per_pixel, "synthetic seabed textures");
    std::vector<ImageId> ids;
    for (const auto& c : chips) {
      ids.push_back(c.id);
      site_of[c.id] = c.site;
    }
    if (opts.latent_from_metric.empty()) {
      log = simulate_judgments(opts.sim);
      // Keep the drawn latents but attach them to the chip ids.
      log = simulate_judgments(opts.sim, ids, log.latent);
    } else {
      const auto vectors = compute_all(chips, opts.metric_cfg, 0);
      std::vector<double> values;
      for (std::size_t i = 0; i < chips.size(); ++i) {
        const auto v = metric_field(vectors[i], opts.latent_from_metric);
        if (!v) throw DataError("metric " + opts.latent_from_metric + " is undefined for " + chips[i].id);
        values.push_back(*v);
      }
      const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
      const double scale = *mx > *mn ? opts.sim.latent_spread / (*mx - *mn) : 0.0;
      for (double& v : values) v *= scale;
      diag << "latent complexity = " << format_real(scale) << " * " << opts.latent_from_metric << '\n';
      log = simulate_judgments(opts.sim, ids, values);
    }
  } else {
    if (!opts.latent_from_metric.empty()) throw InvalidArgument("--latent-from-metric requires --with-chips");
    log = simulate_judgments(opts.sim);
  }

  write_log(out_dir / "judgments.jsonl", log.comparisons);
  CsvTable truth{{"id", "site", "latent"}, {}};
  for (std::size_t i = 0; i < log.image_ids.size(); ++i) {
    const auto site = site_of.count(log.image_ids[i]) ? site_of.at(log.image_ids[i]) : "?";
    truth.rows.push_back({log.image_ids[i], site, format_real(log.latent[i])});
  }
  write_csv(out_dir / "ground_truth.csv", truth);
  write_json(out_dir / "simulate.config.json", {{"command", "simulate"},
                                                {"simulation", to_json(opts.sim)},
                                                {"with_chips", opts.with_chips},
                                                {"chip_size_px", opts.chip_size_px},
                                                {"meters_per_pixel", opts.meters_per_pixel},
                                                {"latent_from_metric", opts.latent_from_metric},
                                                {"metric_config", to_json(opts.metric_cfg)}});
  return log;
}

}  // namespace sasc
