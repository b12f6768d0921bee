#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "oracles.hpp"
#include "sasc/errors.hpp"
#include "sasc/rating_service.hpp"

using namespace sasc;
namespace fs = std::filesystem;

namespace {

std::vector<ImageId> ids(std::size_t n) {
  std::vector<ImageId> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("im" + std::to_string(100 + i));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(LogLine, RoundTrip) {
  Comparison c{"c1", "a", "b", Outcome::Neutral, "op \"x\"", 1700000000123, std::nullopt};
  EXPECT_EQ(parse_log_line(to_log_line(c)), c);
  c.repeat_of = "c0";
  c.outcome = Outcome::RightMoreComplex;
  EXPECT_EQ(parse_log_line(to_log_line(c)), c);
  EXPECT_EQ(to_log_line(c).find('\n'), std::string::npos);
}

TEST(LogLine, ExactFieldSet) {
  const auto line = to_log_line({"c1", "a", "b", Outcome::LeftMoreComplex, "op", 5, std::nullopt});
  EXPECT_EQ(line,
            R"({"comparison_id":"c1","operator_id":"op","left":"a","right":"b","outcome":"LEFT",)"
            R"("unix_timestamp_ms":5,"repeat_of":null})");
}

TEST(LogLine, Malformed) {
  EXPECT_THROW(parse_log_line("{"), DataError);
  EXPECT_THROW(parse_log_line("[]"), DataError);
  EXPECT_THROW(parse_log_line(R"({"comparison_id":"c","operator_id":"o","left":"a","right":"b","outcome":"UP",)"
                              R"("unix_timestamp_ms":1,"repeat_of":null})"),
               DataError);
  EXPECT_THROW(parse_log_line(R"({"comparison_id":"c","operator_id":"o","left":"a","right":"a","outcome":"LEFT",)"
                              R"("unix_timestamp_ms":1,"repeat_of":null})"),
               DataError);
}

TEST(ReplayLog, EmptyAndMissing) {
  testutil::TempDir dir;
  EXPECT_TRUE(replay_log(dir / "none.jsonl").records.empty());
  std::ofstream(dir / "empty.jsonl").close();
  const auto r = replay_log(dir / "empty.jsonl");
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ReplayLog, CorruptLineIsolated) {
  testutil::TempDir dir;
  std::vector<Comparison> recs;
  for (int i = 0; i < 100; ++i) {
    recs.push_back({"c" + std::to_string(i), "a", "b", Outcome::LeftMoreComplex, "op", 1000 + i, std::nullopt});
  }
  write_log(dir / "log.jsonl", recs);
  std::string text = slurp(dir / "log.jsonl");
  const auto pos = text.find("\"c42\"");
  text.replace(pos, 5, "\"c42");  // breaks the JSON of line 43
  std::ofstream(dir / "log.jsonl", std::ios::binary | std::ios::trunc) << text;
  const auto r = replay_log(dir / "log.jsonl");
  EXPECT_EQ(r.records.size(), 99u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 43u);
}

TEST(RatingService, TwoImagesAlwaysSamePairBothSides) {
  testutil::TempDir dir;
  RatingService svc(ids(2), dir / "log.jsonl", {0.0, 1});
  std::set<std::string> lefts;
  for (int i = 0; i < 40; ++i) {
    const auto p = svc.next_pair("op");
    EXPECT_EQ(std::minmax(p.left, p.right), std::minmax(std::string("im100"), std::string("im101")));
    lefts.insert(p.left);
  }
  EXPECT_EQ(lefts.size(), 2u);
}

TEST(RatingService, TooFewImages) {
  testutil::TempDir dir;
  RatingService svc(ids(1), dir / "log.jsonl");
  EXPECT_THROW(svc.next_pair("op"), ServiceUnavailable);
}

TEST(RatingService, ForcedRepeat) {
  testutil::TempDir dir;
  RatingService svc(ids(20), dir / "log.jsonl", {1.0, 2});
  const auto first = svc.next_pair("op");
  EXPECT_FALSE(first.repeat_of.has_value());  // nothing to repeat yet
  svc.record_judgment(first.comparison_id, Outcome::LeftMoreComplex);
  const auto again = svc.next_pair("op");
  ASSERT_TRUE(again.repeat_of.has_value());
  EXPECT_EQ(*again.repeat_of, first.comparison_id);
  EXPECT_EQ(std::minmax(again.left, again.right), std::minmax(first.left, first.right));
  // Repeats are per operator.
  EXPECT_FALSE(svc.next_pair("other").repeat_of.has_value());
}

TEST(RatingService, RecordAndConflicts) {
  testutil::TempDir dir;
  RatingService svc(ids(10), dir / "log.jsonl", {0.0, 3});
  const auto p = svc.next_pair("op");
  const auto rec = svc.record_judgment(p.comparison_id, Outcome::Neutral);
  EXPECT_EQ(rec.outcome, Outcome::Neutral);
  EXPECT_EQ(rec.operator_id, "op");
  EXPECT_THROW(svc.record_judgment(p.comparison_id, Outcome::Neutral), ConflictError);
  EXPECT_THROW(svc.record_judgment("nope", Outcome::Neutral), ConflictError);
  const auto replay = replay_log(dir / "log.jsonl");
  ASSERT_EQ(replay.records.size(), 1u);
  EXPECT_EQ(replay.records[0], rec);
}

TEST(RatingService, NewPairExpiresPending) {
  testutil::TempDir dir;
  RatingService svc(ids(10), dir / "log.jsonl", {0.0, 4});
  const auto stale = svc.next_pair("op");
  const auto fresh = svc.next_pair("op");
  EXPECT_THROW(svc.record_judgment(stale.comparison_id, Outcome::LeftMoreComplex), ConflictError);
  EXPECT_NO_THROW(svc.record_judgment(fresh.comparison_id, Outcome::LeftMoreComplex));
}

TEST(RatingService, ReproducibleSampling) {
  testutil::TempDir a, b;
  RatingService s1(ids(30), a / "log.jsonl", {0.0, 9}), s2(ids(30), b / "log.jsonl", {0.0, 9});
  for (int i = 0; i < 50; ++i) {
    const auto p1 = s1.next_pair("op"), p2 = s2.next_pair("op");
    EXPECT_EQ(p1.left, p2.left);
    EXPECT_EQ(p1.right, p2.right);
    EXPECT_NE(p1.left, p1.right);
  }
}

TEST(RatingService, ProgressStats) {
  testutil::TempDir dir;
  RatingService svc(ids(5), dir / "log.jsonl", {0.0, 5});
  auto st = svc.progress_stats();
  EXPECT_EQ(st.total, 0u);
  EXPECT_EQ(st.per_image_max, 0u);
  EXPECT_EQ(st.per_image.size(), 5u);
  const auto p = svc.next_pair("op");
  svc.record_judgment(p.comparison_id, Outcome::RightMoreComplex);
  st = svc.progress_stats();
  EXPECT_EQ(st.total, 1u);
  std::size_t ones = 0;
  for (const auto& [id, n] : st.per_image) ones += n == 1;
  EXPECT_EQ(ones, 2u);
  EXPECT_EQ(st.per_operator.at("op"), 1u);
  EXPECT_DOUBLE_EQ(st.per_image_mean, 2.0 / 5.0);
}

TEST(RatingService, RestartKeepsHistoryAndAppends) {
  testutil::TempDir dir;
  std::string first_id;
  {
    RatingService svc(ids(6), dir / "log.jsonl", {0.0, 6});
    const auto p = svc.next_pair("op");
    first_id = p.comparison_id;
    svc.record_judgment(p.comparison_id, Outcome::LeftMoreComplex);
  }
  const std::string before = slurp(dir / "log.jsonl");
  {
    RatingService svc(ids(6), dir / "log.jsonl", {1.0, 6});
    EXPECT_EQ(svc.progress_stats().total, 1u);
    const auto p = svc.next_pair("op");
    ASSERT_TRUE(p.repeat_of.has_value());
    EXPECT_EQ(*p.repeat_of, first_id);
    EXPECT_NE(p.comparison_id, first_id);
    svc.record_judgment(p.comparison_id, Outcome::RightMoreComplex);
  }
  const std::string after = slurp(dir / "log.jsonl");
  EXPECT_EQ(after.substr(0, before.size()), before);  // append-only
  EXPECT_EQ(replay_log(dir / "log.jsonl").records.size(), 2u);
}

TEST(RatingService, TornTailIsRepaired) {
  testutil::TempDir dir;
  {
    RatingService svc(ids(6), dir / "log.jsonl", {0.0, 7});
    const auto p = svc.next_pair("op");
    svc.record_judgment(p.comparison_id, Outcome::LeftMoreComplex);
  }
  std::ofstream(dir / "log.jsonl", std::ios::app) << R"({"comparison_id":"half)";
  {
    RatingService svc(ids(6), dir / "log.jsonl", {0.0, 7});
    const auto p = svc.next_pair("op");
    svc.record_judgment(p.comparison_id, Outcome::LeftMoreComplex);
  }
  const auto r = replay_log(dir / "log.jsonl");
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.errors.size(), 1u);
}

TEST(RatingService, ConcurrentOperators) {
  testutil::TempDir dir;
  RatingService svc(ids(15), dir / "log.jsonl", {0.1, 8});
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&svc, t] {
      for (int i = 0; i < 25; ++i) {
        const auto p = svc.next_pair("op" + std::to_string(t));
        svc.record_judgment(p.comparison_id, Outcome::Neutral);
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto r = replay_log(dir / "log.jsonl");
  ASSERT_EQ(r.records.size(), 100u);
  std::set<std::string> unique;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    unique.insert(r.records[i].id);
    if (i) EXPECT_GE(r.records[i].timestamp_ms, r.records[i - 1].timestamp_ms);
  }
  EXPECT_EQ(unique.size(), 100u);
}

TEST(ServiceConfig, Validation) {
  EXPECT_THROW((ServiceConfig{-0.1, 0}.validate()), InvalidArgument);
  EXPECT_THROW((ServiceConfig{1.1, 0}.validate()), InvalidArgument);
  EXPECT_NO_THROW((ServiceConfig{}.validate()));
  EXPECT_EQ(ServiceConfig{}.p_repeat, 0.1);
}
