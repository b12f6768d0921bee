#include "sasc/rating_service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sasc/errors.hpp"

namespace sasc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_log_line(const Comparison& c) {
  nlohmann::ordered_json j;
  j["comparison_id"] = c.id;
  j["operator_id"] = c.operator_id;
  j["left"] = c.left;
  j["right"] = c.right;
  j["outcome"] = std::string(to_string(c.outcome));
  j["unix_timestamp_ms"] = c.timestamp_ms;
  j["repeat_of"] = c.repeat_of ? json(*c.repeat_of) : json(nullptr);
  return j.dump();
}

Comparison parse_log_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("record is not a JSON object");
  Comparison c;
  try {
    c.id = j.at("comparison_id").get<std::string>();
    c.operator_id = j.at("operator_id").get<std::string>();
    c.left = j.at("left").get<std::string>();
    c.right = j.at("right").get<std::string>();
    c.outcome = parse_outcome(j.at("outcome").get<std::string>());
    c.timestamp_ms = j.at("unix_timestamp_ms").get<std::int64_t>();
    if (j.contains("repeat_of") && !j.at("repeat_of").is_null()) c.repeat_of = j.at("repeat_of").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad field: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  if (c.id.empty()) throw DataError("empty comparison_id");
  if (c.left == c.right) throw DataError("left and right images are identical");
  return c;
}

ReplayResult replay_log(const fs::path& path) {
  ReplayResult result;
  if (!fs::exists(path)) return result;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read log " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.records.push_back(parse_log_line(line));
    } catch (const DataError& e) {
      result.errors.push_back({number, e.what()});
    }
  }
  if (in.bad()) throw DataError("I/O error reading " + path.string());
  return result;
}

void write_log(const fs::path& path, const std::vector<Comparison>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write log " + path.string());
  for (const auto& c : records) out << to_log_line(c) << '\n';
  if (!out) throw DataError("failed writing log " + path.string());
}

JudgmentLog::JudgmentLog(fs::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw DataError("cannot open log " + path_.string() + ": " + std::strerror(errno));
  // A torn final line from a crash must not swallow the next record.
  const auto size = fs::file_size(path_);
  if (size > 0) {
    std::ifstream in(path_, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(size) - 1);
    if (in.get() != '\n' && ::write(fd_, "\n", 1) != 1) {
      throw DataError("cannot repair log " + path_.string());
    }
  }
}

JudgmentLog::~JudgmentLog() {
  if (fd_ >= 0) ::close(fd_);
}

void JudgmentLog::append(const Comparison& c) {
  const std::string line = to_log_line(c) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DataError("log append failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw DataError("log fsync failed: " + std::string(std::strerror(errno)));
}

void ServiceConfig::validate() const {
  if (!(p_repeat >= 0.0 && p_repeat <= 1.0)) throw InvalidArgument("p_repeat must lie in [0, 1]");
}

RatingService::RatingService(std::vector<ImageId> image_ids, fs::path log_path, ServiceConfig cfg)
    : image_ids_(std::move(image_ids)), cfg_(cfg), log_(std::move(log_path)) {
  cfg_.validate();
  std::sort(image_ids_.begin(), image_ids_.end());
  image_ids_.erase(std::unique(image_ids_.begin(), image_ids_.end()), image_ids_.end());
  for (const auto& id : image_ids_) image_counts_[id] = 0;
  for (const auto& c : replay_log(log_.path()).records) account(c);
}

void RatingService::account(const Comparison& c) {
  known_ids_.insert(c.id);
  ++total_;
  ++image_counts_[c.left];
  ++image_counts_[c.right];
  ++operator_counts_[c.operator_id];
  last_timestamp_ms_ = std::max(last_timestamp_ms_, c.timestamp_ms);
  if (!c.repeat_of) originals_[c.operator_id].push_back({c.id, c.left, c.right});
}

RatingService::Session& RatingService::session(const std::string& operator_id) {
  auto it = sessions_.find(operator_id);
  if (it == sessions_.end()) {
    const auto history = operator_counts_.count(operator_id) ? operator_counts_[operator_id] : 0;
    const auto seed = stream_seed(cfg_.seed ^ hash_string(operator_id), history);
    it = sessions_.emplace(operator_id, Session(seed)).first;
  }
  return it->second;
}

std::string RatingService::fresh_id(Rng& rng) {
  char buf[48];
  std::string id;
  do {
    std::snprintf(buf, sizeof buf, "c%08llu-%012llx", static_cast<unsigned long long>(total_ + ++issued_),
                  static_cast<unsigned long long>(rng.next() >> 16));
    id = buf;
  } while (known_ids_.count(id) || pending_owner_.count(id));
  return id;
}

PairAssignment RatingService::next_pair(const std::string& operator_id) {
  if (operator_id.empty()) throw InvalidArgument("operator id must be non-empty");
  std::lock_guard lock(mu_);
  if (image_ids_.size() < 2) throw ServiceUnavailable("dataset has fewer than two images");

  Session& s = session(operator_id);
  if (s.pending) pending_owner_.erase(s.pending->comparison_id);

  Pending p;
  const auto history = originals_.find(operator_id);
  const bool can_repeat = history != originals_.end() && !history->second.empty();
  if (can_repeat && cfg_.p_repeat > 0.0 && s.rng.bernoulli(cfg_.p_repeat)) {
    const auto& orig = history->second[s.rng.below(history->second.size())];
    p.repeat_of = orig.comparison_id;
    p.left = orig.left;
    p.right = orig.right;
    if (s.rng.bernoulli(0.5)) std::swap(p.left, p.right);
  } else {
    // Uniform over ordered pairs: uniform unordered pair, random placement.
    const auto n = image_ids_.size();
    const auto i = s.rng.below(n);
    auto j = s.rng.below(n - 1);
    if (j >= i) ++j;
    p.left = image_ids_[i];
    p.right = image_ids_[j];
  }
  p.comparison_id = fresh_id(s.rng);
  pending_owner_[p.comparison_id] = operator_id;
  ++s.served_pairs;
  s.pending = p;
  return {p.comparison_id, p.left, p.right, p.repeat_of};
}

Comparison RatingService::record_judgment(const std::string& comparison_id, Outcome outcome) {
  std::lock_guard lock(mu_);
  const auto owner = pending_owner_.find(comparison_id);
  if (owner == pending_owner_.end()) {
    throw ConflictError("comparison " + comparison_id + " is not pending (unknown, expired or already judged)");
  }
  Session& s = sessions_.at(owner->second);
  if (!s.pending || s.pending->comparison_id != comparison_id) {
    throw ConflictError("comparison " + comparison_id + " is not the operator's pending pair");
  }

  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  Comparison c;
  c.id = comparison_id;
  c.left = s.pending->left;
  c.right = s.pending->right;
  c.outcome = outcome;
  c.operator_id = owner->second;
  c.timestamp_ms = std::max<std::int64_t>(now, last_timestamp_ms_);
  c.repeat_of = s.pending->repeat_of;

  log_.append(c);  // durable before anything is acknowledged
  account(c);
  s.pending.reset();
  pending_owner_.erase(owner);
  return c;
}

ProgressStats RatingService::progress_stats() const {
  std::lock_guard lock(mu_);
  ProgressStats st;
  st.total = total_;
  st.per_operator = operator_counts_;
  st.per_image = image_counts_;
  if (!image_ids_.empty()) {
    std::uint64_t sum = 0, mn = UINT64_MAX, mx = 0;
    for (const auto& id : image_ids_) {
      const auto n = image_counts_.at(id);
      sum += n;
      mn = std::min(mn, n);
      mx = std::max(mx, n);
    }
    st.per_image_mean = static_cast<double>(sum) / static_cast<double>(image_ids_.size());
    st.per_image_min = mn;
    st.per_image_max = mx;
  }
  return st;
}

}  // namespace sasc
