#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstring>

#include "sasc/analysis.hpp"
#include "sasc/elo.hpp"
#include "sasc/errors.hpp"
#include "sasc/metrics.hpp"
#include "sasc/simulate.hpp"
#include "sasc/synth.hpp"

namespace py = pybind11;
using namespace sasc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image2D to_image(const Array& a, double mpp) {
  if (a.ndim() != 2) throw InvalidArgument("image must be a 2-D array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  std::vector<double> v(a.data(), a.data() + h * w);
  return Image2D(w, h, std::move(v), mpp);
}

Array to_array(const Image2D& img) {
  Array out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.values().data(), img.size() * sizeof(double));
  return out;
}

Comparison comparison_from(const py::dict& d) {
  Comparison c;
  c.id = d.contains("comparison_id") ? d["comparison_id"].cast<std::string>() : std::string{};
  c.left = d["left"].cast<std::string>();
  c.right = d["right"].cast<std::string>();
  c.outcome = parse_outcome(d["outcome"].cast<std::string>());
  if (d.contains("operator_id")) c.operator_id = d["operator_id"].cast<std::string>();
  if (d.contains("unix_timestamp_ms")) c.timestamp_ms = d["unix_timestamp_ms"].cast<std::int64_t>();
  if (d.contains("repeat_of") && !d["repeat_of"].is_none()) c.repeat_of = d["repeat_of"].cast<std::string>();
  return c;
}

py::dict comparison_to(const Comparison& c) {
  py::dict d;
  d["comparison_id"] = c.id;
  d["operator_id"] = c.operator_id;
  d["left"] = c.left;
  d["right"] = c.right;
  d["outcome"] = std::string(to_string(c.outcome));
  d["unix_timestamp_ms"] = c.timestamp_ms;
  d["repeat_of"] = c.repeat_of ? py::cast(*c.repeat_of) : py::none();
  return d;
}

MetricConfig metric_config(const py::kwargs& kw) {
  MetricConfig cfg;
  for (auto [k, v] : kw) {
    const auto key = k.cast<std::string>();
    if (key == "drc_epsilon") cfg.drc_epsilon = v.cast<double>();
    else if (key == "lacunarity_box_m") cfg.lacunarity_box_m = v.cast<double>();
    else if (key == "sobel_kernel_m") cfg.sobel_kernel_m = v.cast<double>();
    else if (key == "entropy_bins") cfg.entropy_bins = v.cast<int>();
    else if (key == "median_kernel_px") cfg.median_kernel_px = v.cast<int>();
    else if (key == "jpeg_quality") cfg.jpeg_quality = v.cast<int>();
    else if (key == "colormap") cfg.colormap = parse_colormap(v.cast<std::string>());
    else throw InvalidArgument("unknown metric option: " + key);
  }
  cfg.validate();
  return cfg;
}

std::vector<Comparison> comparisons_from(const std::vector<py::dict>& judgments, std::vector<std::string>& ids) {
  std::vector<Comparison> cs;
  for (const auto& d : judgments) cs.push_back(comparison_from(d));
  if (ids.empty()) {
    for (const auto& c : cs) {
      ids.push_back(c.left);
      ids.push_back(c.right);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  return cs;
}

TextureKind texture_from(const std::string& name) {
  if (name == "flat") return FlatSpeckle{};
  if (name == "ripples") return Ripples{};
  if (name == "clutter") return Clutter{};
  if (name == "bioturbation") return Bioturbation{};
  if (name == "mixed") return Mixed{};
  throw InvalidArgument("unknown texture: " + name);
}

}  // namespace

PYBIND11_MODULE(_sasc, m) {
  m.doc() = "Seabed image complexity: Elo ratings, texture metrics and statistics";

  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DataError& e) {
      data_error(e.what());
    } catch (const ConflictError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    } catch (const MetricUnavailable& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def("expected_score", &expected_score, py::arg("r_i"), py::arg("r_j"), py::arg("scale") = 400.0);

  m.def(
      "run_sequence",
      [](const std::vector<py::dict>& judgments, std::vector<std::string> ids, double k_factor,
         double initial_rating) {
        const auto cs = comparisons_from(judgments, ids);
        EloConfig cfg;
        cfg.k_factor = k_factor;
        cfg.initial_rating = initial_rating;
        cfg.validate();
        const auto state = run_sequence(cs, ids, cfg);
        py::dict out;
        for (std::size_t i = 0; i < state.size(); ++i) out[py::cast(state.ids()[i])] = state.ratings()[i];
        return out;
      },
      py::arg("judgments"), py::arg("image_ids") = std::vector<std::string>{}, py::arg("k_factor") = 32.0,
      py::arg("initial_rating") = 1000.0);

  m.def(
      "run_replicated",
      [](const std::vector<py::dict>& judgments, std::vector<std::string> ids, std::uint32_t replications,
         std::uint64_t seed, double k_factor, double initial_rating, double ci_level, unsigned workers) {
        const auto cs = comparisons_from(judgments, ids);
        EloConfig cfg;
        cfg.k_factor = k_factor;
        cfg.initial_rating = initial_rating;
        cfg.num_replications = replications;
        cfg.seed = seed;
        cfg.ci_level = ci_level;
        cfg.num_workers = workers;
        cfg.validate();
        EloResult res;
        {
          py::gil_scoped_release release;
          res = run_replicated(cs, ids, cfg);
        }
        py::list out;
        for (const auto& r : res.images) {
          py::dict d;
          d["id"] = r.id;
          d["mean_rating"] = r.mean_rating;
          d["std_rating"] = r.std_rating;
          d["ci_low"] = r.ci_low;
          d["ci_high"] = r.ci_high;
          d["comparisons"] = r.comparisons_count;
          out.append(d);
        }
        return out;
      },
      py::arg("judgments"), py::arg("image_ids") = std::vector<std::string>{}, py::arg("replications") = 1000,
      py::arg("seed") = 0, py::arg("k_factor") = 32.0, py::arg("initial_rating") = 1000.0,
      py::arg("ci_level") = 0.95, py::arg("workers") = 0);

  m.def(
      "simulate_judgments",
      [](std::size_t n_images, std::size_t n_comparisons, std::uint64_t seed, double latent_spread,
         double noise_scale, double p_repeat) {
        SimulationConfig cfg;
        cfg.n_images = n_images;
        cfg.n_comparisons = n_comparisons;
        cfg.seed = seed;
        cfg.latent_spread = latent_spread;
        cfg.p_repeat = p_repeat;
        for (auto& r : cfg.raters) r.noise_scale = noise_scale;
        cfg.validate();
        const auto log = simulate_judgments(cfg);
        py::dict latent;
        for (std::size_t i = 0; i < log.image_ids.size(); ++i) latent[py::cast(log.image_ids[i])] = log.latent[i];
        py::list judgments;
        for (const auto& c : log.comparisons) judgments.append(comparison_to(c));
        return py::make_tuple(judgments, latent);
      },
      py::arg("n_images") = 117, py::arg("n_comparisons") = 5722, py::arg("seed") = 0,
      py::arg("latent_spread") = 600.0, py::arg("noise_scale") = 400.0, py::arg("p_repeat") = 0.0,
      "Returns (judgments, latent) where latent maps image id to its true complexity.");

  m.def(
      "lacunarity", [](const Array& a, double box_px) {
        return lacunarity_px(to_image(a, 1.0), static_cast<std::size_t>(box_px));
      },
      py::arg("image"), py::arg("box_px"));
  m.def(
      "edge_intensity", [](const Array& a, std::size_t k) { return edge_intensity_px(to_image(a, 1.0), k); },
      py::arg("image"), py::arg("kernel_px"));
  m.def(
      "structural_entropy", [](const Array& a, int bins) { return structural_entropy(to_image(a, 1.0), bins); },
      py::arg("image"), py::arg("bins") = 64);
  m.def(
      "median_filter", [](const Array& a, int k) { return to_array(median_filter(to_image(a, 1.0), k)); },
      py::arg("image"), py::arg("kernel_px"));
  m.def(
      "dynamic_range_compress",
      [](const Array& a, double eps) { return to_array(dynamic_range_compress(to_image(a, 1.0), eps)); },
      py::arg("image"), py::arg("epsilon") = 1e-10);
  m.def(
      "compression_ratio",
      [](const Array& a, const py::kwargs& kw) {
        const auto r = compression_ratio(to_image(a, 1.0), metric_config(kw));
        py::dict d;
        d["ratio"] = r.ratio;
        d["ratio_rmse"] = r.ratio_rmse;
        d["rmse"] = r.rmse;
        d["lossy_bytes"] = r.lossy_bytes;
        d["lossless_bytes"] = r.lossless_bytes;
        return d;
      },
      py::arg("image"));
  m.def(
      "metric_vector",
      [](const Array& a, double mpp, const py::kwargs& kw) {
        const auto v = compute_metric_vector(to_image(a, mpp), metric_config(kw));
        py::dict d;
        auto put = [&](const char* k, const std::optional<double>& x) { d[k] = x ? py::cast(*x) : py::none(); };
        put("lacunarity", v.lacunarity);
        put("edge_intensity", v.edge_intensity);
        put("entropy", v.entropy);
        put("compression_ratio", v.compression_ratio);
        put("compression_ratio_rmse", v.compression_ratio_rmse);
        py::list failures;
        for (const auto& f : v.failures) failures.append(py::make_tuple(f.field, f.reason, f.detail));
        d["failures"] = failures;
        return d;
      },
      py::arg("image"), py::arg("meters_per_pixel"),
      "All five metrics for a linear-intensity chip. Failed metrics are None and listed in 'failures'.");

  m.def(
      "synthesize_chip",
      [](const std::string& texture, std::size_t size_px, double mpp, std::uint64_t seed) {
        return to_array(synthesize_chip(texture_from(texture), size_px, mpp, seed).image);
      },
      py::arg("texture"), py::arg("size_px") = 200, py::arg("meters_per_pixel") = 0.05, py::arg("seed") = 0,
      "texture is one of flat, ripples, clutter, bioturbation, mixed.");

  m.def(
      "pearson", [](std::vector<double> x, std::vector<double> y) { return pearson(x, y); }, py::arg("x"),
      py::arg("y"));
  m.def(
      "spearman", [](std::vector<double> x, std::vector<double> y) { return spearman(x, y); }, py::arg("x"),
      py::arg("y"));
  m.def(
      "linear_regression",
      [](std::vector<double> x, std::vector<double> y) {
        const auto r = linear_regression(x, y);
        py::dict d;
        d["slope"] = r.slope;
        d["intercept"] = r.intercept;
        d["r_squared"] = r.r_squared;
        d["n"] = r.n;
        return d;
      },
      py::arg("x"), py::arg("y"));
}
