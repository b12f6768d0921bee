#include "sasc/http_api.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sasc/errors.hpp"
#include "sasc/metrics.hpp"
#include "sasc/rng.hpp"

namespace sasc {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& error, const std::string& detail) {
  res.status = status;
  res.set_content(json{{"error", error}, {"detail", detail}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body) {
  res.status = 200;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

Bytes render_drc_png(const Image2D& img, double epsilon, double window_db) {
  const Image2D drc = dynamic_range_compress(normalize_unit(img), epsilon);
  std::vector<std::uint8_t> pixels(drc.size());
  const auto values = drc.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = std::clamp((values[i] + window_db) / window_db, 0.0, 1.0);
    pixels[i] = static_cast<std::uint8_t>(std::lround(t * 255.0));
  }
  return encode_png_gray8(drc.width(), drc.height(), pixels);
}

RatingHttpServer::RatingHttpServer(RatingService& service, std::map<ImageId, Image2D> images,
                                   std::uint64_t token_seed, std::filesystem::path static_dir)
    : service_(service), images_(std::move(images)), server_(std::make_unique<httplib::Server>()) {
  char buf[24];
  for (const auto& [id, img] : images_) {
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(stream_seed(token_seed, hash_string(id))));
    token_of_[id] = buf;
    id_of_[buf] = id;
  }
  install_routes();
  if (!static_dir.empty() && !server_->set_mount_point("/", static_dir.string())) {
    throw DataError("static asset directory " + static_dir.string() + " is not readable");
  }
}

RatingHttpServer::~RatingHttpServer() { stop(); }

std::string RatingHttpServer::image_token(const ImageId& id) const {
  const auto it = token_of_.find(id);
  return it == token_of_.end() ? std::string{} : it->second;
}

const Bytes& RatingHttpServer::rendered(const ImageId& id) {
  std::lock_guard lock(cache_mu_);
  auto it = png_cache_.find(id);
  if (it == png_cache_.end()) it = png_cache_.emplace(id, render_drc_png(images_.at(id))).first;
  return it->second;
}

void RatingHttpServer::install_routes() {
  auto& srv = *server_;

  srv.Get("/api/pair", [this](const httplib::Request& req, httplib::Response& res) {
    const auto op = req.get_param_value("operator");
    if (op.empty()) return send_error(res, 400, "invalid_argument", "query parameter 'operator' is required");
    try {
      const auto pair = service_.next_pair(op);
      send_json(res, {{"comparison_id", pair.comparison_id},
                      {"left_url", "/api/images/" + image_token(pair.left)},
                      {"right_url", "/api/images/" + image_token(pair.right)}});
    } catch (const ServiceUnavailable& e) {
      send_error(res, 503, "service_unavailable", e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, "invalid_argument", e.what());
    }
  });

  srv.Post("/api/judgment", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      return send_error(res, 400, "invalid_argument", std::string("body is not JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("comparison_id") || !body["comparison_id"].is_string() ||
        !body.contains("outcome") || !body["outcome"].is_string()) {
      return send_error(res, 400, "invalid_argument", "body needs string fields comparison_id and outcome");
    }
    try {
      const auto outcome = parse_outcome(body["outcome"].get<std::string>());
      const auto rec = service_.record_judgment(body["comparison_id"].get<std::string>(), outcome);
      send_json(res, {{"status", "recorded"}, {"comparison_id", rec.id}});
    } catch (const InvalidArgument& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const DataError& e) {
      send_error(res, 500, "log_write_failed", e.what());
    }
  });

  srv.Get(R"(/api/images/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto it = id_of_.find(req.matches[1].str());
    if (it == id_of_.end()) return send_error(res, 404, "not_found", "no such image");
    try {
      const Bytes& png = rendered(it->second);
      res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
    } catch (const std::exception& e) {
      send_error(res, 500, "render_failed", e.what());
    }
  });

  srv.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    const auto st = service_.progress_stats();
    send_json(res, {{"total", st.total},
                    {"per_image", {{"mean", st.per_image_mean}, {"min", st.per_image_min}, {"max", st.per_image_max}}},
                    {"per_operator", st.per_operator},
                    {"n_images", st.per_image.size()}});
  });

  // Unmatched routes and uncaught exceptions still answer with {error, detail}.
  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    send_error(res, res.status, res.status == 404 ? "not_found" : "error", req.method + " " + req.path);
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string detail = "unknown exception";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      detail = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", detail);
  });
}

int RatingHttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool RatingHttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void RatingHttpServer::stop() {
  if (server_) server_->stop();
}

bool RatingHttpServer::is_running() const { return server_->is_running(); }

}  // namespace sasc
