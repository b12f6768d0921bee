#pragma once

// Backend of the pairwise rating tool: pair sampling, the append-only
// judgment log, repeat injection for self-consistency, and progress counts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sasc/elo.hpp"
#include "sasc/rng.hpp"

namespace sasc {

// One JSON object per line:
// {"comparison_id","operator_id","left","right","outcome","unix_timestamp_ms","repeat_of"}
std::string to_log_line(const Comparison& c);
Comparison parse_log_line(std::string_view line);

struct LogParseError {
  std::size_t line = 0;  // 1-based
  std::string detail;
};

struct ReplayResult {
  std::vector<Comparison> records;  // file order
  std::vector<LogParseError> errors;
};

// Throws DataError when the file cannot be read. A missing file replays as empty.
ReplayResult replay_log(const std::filesystem::path& path);

// Rewrites `path` with the given records (used for simulated logs).
void write_log(const std::filesystem::path& path, const std::vector<Comparison>& records);

// Single-writer append path; every append is fsync'd before returning.
class JudgmentLog {
 public:
  explicit JudgmentLog(std::filesystem::path path);
  ~JudgmentLog();
  JudgmentLog(const JudgmentLog&) = delete;
  JudgmentLog& operator=(const JudgmentLog&) = delete;

  void append(const Comparison& c);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

struct ServiceConfig {
  double p_repeat = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PairAssignment {
  std::string comparison_id;
  ImageId left;
  ImageId right;
  std::optional<std::string> repeat_of;
};

struct ProgressStats {
  std::uint64_t total = 0;
  std::map<ImageId, std::uint64_t> per_image;  // every dataset image, zero included
  double per_image_mean = 0.0;
  std::uint64_t per_image_min = 0;
  std::uint64_t per_image_max = 0;
  std::map<std::string, std::uint64_t> per_operator;
};

// Thread-safe. Existing records in the log are replayed on construction so
// history, ids and counts survive restarts.
class RatingService {
 public:
  RatingService(std::vector<ImageId> image_ids, std::filesystem::path log_path, ServiceConfig cfg = {});

  PairAssignment next_pair(const std::string& operator_id);
  Comparison record_judgment(const std::string& comparison_id, Outcome outcome);
  ProgressStats progress_stats() const;

  const std::vector<ImageId>& image_ids() const { return image_ids_; }
  const std::filesystem::path& log_path() const { return log_.path(); }

 private:
  struct Pending {
    std::string comparison_id;
    ImageId left;
    ImageId right;
    std::optional<std::string> repeat_of;
  };
  struct Session {
    explicit Session(std::uint64_t seed) : rng(seed) {}
    std::uint64_t served_pairs = 0;
    std::optional<Pending> pending;
    Rng rng;
  };
  struct Judged {
    std::string comparison_id;
    ImageId left;
    ImageId right;
  };

  Session& session(const std::string& operator_id);
  std::string fresh_id(Rng& rng);
  void account(const Comparison& c);

  std::vector<ImageId> image_ids_;
  ServiceConfig cfg_;
  JudgmentLog log_;

  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::unordered_map<std::string, std::string> pending_owner_;  // comparison id -> operator
  std::set<std::string> known_ids_;
  std::map<std::string, std::vector<Judged>> originals_;  // per operator
  std::map<ImageId, std::uint64_t> image_counts_;
  std::map<std::string, std::uint64_t> operator_counts_;
  std::uint64_t total_ = 0;
  std::uint64_t issued_ = 0;
  std::int64_t last_timestamp_ms_ = 0;
};

}  // namespace sasc
