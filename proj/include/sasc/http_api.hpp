#pragma once

// HTTP JSON front of the rating service.
//
//   GET  /api/pair?operator=<id>  -> {comparison_id, left_url, right_url}
//   POST /api/judgment            <- {comparison_id, outcome: LEFT|RIGHT|NEUTRAL}
//   GET  /api/images/<token>      -> 8-bit PNG of the DRC-rendered chip
//   GET  /api/stats               -> progress summary
//
// Errors are {error, detail} with 400, 404, 409, 503 or 500.
// Image URLs carry opaque tokens so raters never see chip ids or sites.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "sasc/codec.hpp"
#include "sasc/image.hpp"
#include "sasc/rating_service.hpp"

namespace httplib {
class Server;
}

namespace sasc {

// normalize -> DRC -> linear map of [-window_db, 0] dB onto 0..255.
Bytes render_drc_png(const Image2D& img, double epsilon = 1e-10, double window_db = 50.0);

class RatingHttpServer {
 public:
  // `images` maps every dataset id to its raster.
  RatingHttpServer(RatingService& service, std::map<ImageId, Image2D> images, std::uint64_t token_seed,
                   std::filesystem::path static_dir = {});
  ~RatingHttpServer();

  // Returns the bound port (useful with port 0), or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;

  std::string image_token(const ImageId& id) const;

 private:
  void install_routes();
  const Bytes& rendered(const ImageId& id);

  RatingService& service_;
  std::map<ImageId, Image2D> images_;
  std::map<ImageId, std::string> token_of_;
  std::map<std::string, ImageId> id_of_;
  std::unique_ptr<httplib::Server> server_;

  std::mutex cache_mu_;
  std::map<ImageId, Bytes> png_cache_;
};

}  // namespace sasc
