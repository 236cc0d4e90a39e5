#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "relnn/datasets.hpp"
#include "relnn/io.hpp"

namespace relnn {
namespace {

SessionRecord session(std::string query, std::uint32_t day,
                      std::vector<std::pair<std::string, bool>> items) {
  SessionRecord r{std::move(query), day, {}};
  std::uint32_t pos = 1;
  for (auto& [id, clicked] : items) r.items.push_back({id, "t" + id, pos++, clicked});
  return r;
}

FiveTuple tuple(std::string q, std::string a, std::string b, std::uint32_t ca,
                std::uint32_t cb, std::uint32_t day) {
  return {std::move(q), {a, "t" + a}, {b, "t" + b}, ca, cb, day};
}

TEST(SessionsToTuples, OnePerPairWithAClick) {
  const auto r = session("q", 3, {{"1", false}, {"2", true}, {"3", false}, {"4", false}});
  const auto t = sessions_to_tuples(r);
  // Pairs touching item 2: (1,2), (2,3), (2,4).
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], tuple("q", "1", "2", 0, 1, 3));
  EXPECT_EQ(t[1], tuple("q", "2", "3", 1, 0, 3));
  EXPECT_EQ(t[2], tuple("q", "2", "4", 1, 0, 3));
  EXPECT_TRUE(sessions_to_tuples(session("q", 0, {{"1", false}, {"2", false}})).empty());
}

TEST(SessionsToTuples, CountMatchesClosedForm) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, bool>> items;
    const int m = 2 + static_cast<int>(rng() % 9);
    int clicked = 0;
    for (int i = 0; i < m; ++i) {
      const bool c = rng() % 3 == 0;
      clicked += c;
      items.emplace_back(std::to_string(i), c);
    }
    const std::size_t unclicked = static_cast<std::size_t>(m - clicked);
    const std::size_t all = static_cast<std::size_t>(m * (m - 1) / 2);
    EXPECT_EQ(sessions_to_tuples(session("q", 0, items)).size(),
              all - unclicked * (unclicked - 1) / 2);
  }
}

TEST(SessionsToTuples, RejectsNonIncreasingPositions) {
  SessionRecord r = session("q", 0, {{"1", true}, {"2", false}});
  r.items[1].position = 1;
  EXPECT_THROW(sessions_to_tuples(r), std::invalid_argument);
}

TEST(AggregateTuples, SumsUnorderedPairsInsideWindow) {
  const std::vector<FiveTuple> in{
      tuple("q", "1", "2", 1, 0, 10), tuple("q", "2", "1", 1, 0, 9),
      tuple("q", "2", "1", 1, 0, 8),  tuple("q", "1", "2", 1, 0, 5),
      tuple("p", "1", "2", 0, 1, 10),
  };
  // Window (10 - 3, 10] drops day 5.
  const auto out = aggregate_tuples(in, 3);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], tuple("p", "2", "1", 1, 0, 10));
  // Item 2 has two clicks against one for item 1, so it leads.
  EXPECT_EQ(out[1], tuple("q", "2", "1", 2, 1, 10));
  EXPECT_EQ(aggregate_tuples(in, 180)[1], tuple("q", "1", "2", 2, 2, 10));
}

TEST(AggregateTuples, ExplicitLastDayAndSelfPairs) {
  const std::vector<FiveTuple> in{tuple("q", "1", "2", 1, 0, 10), tuple("q", "1", "2", 0, 1, 4)};
  const auto out = aggregate_tuples(in, 2, 5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], tuple("q", "2", "1", 1, 0, 5));
  EXPECT_THROW(aggregate_tuples(std::vector{tuple("q", "1", "1", 1, 0, 0)}),
               std::invalid_argument);
}

TEST(RetainTopK, KeepsLargestClickSumsPerQuery) {
  std::vector<FiveTuple> in;
  for (int i = 0; i < 150; ++i) {
    in.push_back(tuple("a", std::to_string(1000 + i), "x", static_cast<std::uint32_t>(i), 1, 0));
  }
  for (int i = 0; i < 5; ++i) in.push_back(tuple("b", std::to_string(i), "x", 1, 0, 0));
  const auto out = retain_top_k(in, 100);
  std::map<std::string, std::size_t> per_query;
  std::uint64_t min_a = ~0ULL;
  for (const auto& t : out) {
    ++per_query[t.query];
    if (t.query == "a") min_a = std::min(min_a, t.click_sum());
  }
  EXPECT_EQ(per_query["a"], 100u);
  EXPECT_EQ(per_query["b"], 5u);
  EXPECT_EQ(min_a, 51u);
  EXPECT_THROW(retain_top_k(in, 0), std::invalid_argument);
}

TEST(ToSessionPairs, CanonicalOrder) {
  const auto pairs = to_session_pairs(std::vector{tuple("q", "1", "2", 1, 3, 0)});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].title_pos, "t2");
  EXPECT_EQ(pairs[0].clicks_pos, 3u);
  EXPECT_EQ(pairs[0].clicks_neg, 1u);
}

TEST(Splits, FractionsByQueryWithoutLeakage) {
  std::vector<std::string> queries;
  for (int i = 0; i < 1000; ++i) {
    for (int r = 0; r < 1 + i % 4; ++r) queries.push_back("q" + std::to_string(i));
  }
  const std::vector<double> fractions{0.65, 0.30, 0.05};
  const auto assignment = assign_query_splits(queries, fractions, 7);
  std::map<std::string, std::set<std::size_t>> splits_of;
  for (std::size_t i = 0; i < queries.size(); ++i) splits_of[queries[i]].insert(assignment[i]);
  std::vector<int> counts(3, 0);
  for (const auto& [q, s] : splits_of) {
    ASSERT_EQ(s.size(), 1u) << q;
    ++counts[*s.begin()];
  }
  EXPECT_EQ(counts, (std::vector<int>{650, 300, 50}));
  EXPECT_EQ(assignment, assign_query_splits(queries, fractions, 7));
  EXPECT_NE(assignment, assign_query_splits(queries, fractions, 8));
}

TEST(Splits, RejectsBadFractions) {
  const std::vector<std::string> q{"a"};
  EXPECT_THROW(assign_query_splits(q, std::vector<double>{0.5, 0.4}, 1), std::invalid_argument);
  EXPECT_THROW(assign_query_splits(q, std::vector<double>{1.5, -0.5}, 1), std::invalid_argument);
  EXPECT_THROW(assign_query_splits(q, std::vector<double>{}, 1), std::invalid_argument);
}

TEST(SeededHash, StableAndSeedSensitive) {
  EXPECT_EQ(seeded_hash("query", 1), seeded_hash("query", 1));
  EXPECT_NE(seeded_hash("query", 1), seeded_hash("query", 2));
  EXPECT_NE(seeded_hash("query", 1), seeded_hash("querz", 1));
}

class IoTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() /
                               ("relnn_io_" + std::to_string(::getpid()));
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(IoTest, RoundTrips) {
  const std::vector<SessionRecord> sessions{session("a b", 4, {{"1", true}, {"2", false}})};
  io::write_sessions(sessions, dir_ / "s.jsonl");
  EXPECT_EQ(io::read_sessions(dir_ / "s.jsonl"), sessions);

  const std::vector<SessionPair> pairs{make_session_pair("q", "x", "y", 1, 2)};
  io::write_session_pairs(pairs, dir_ / "p.jsonl");
  EXPECT_EQ(io::read_session_pairs(dir_ / "p.jsonl"), pairs);

  const std::vector<RatingExample> ratings{{"q", "t", Grade::kExcellent}, {"q", "u", Grade::kBad}};
  io::write_ratings(ratings, dir_ / "r.jsonl");
  EXPECT_EQ(io::read_ratings(dir_ / "r.jsonl"), ratings);
}

TEST_F(IoTest, MalformedRowsReportLine) {
  io::write_text(dir_ / "bad.jsonl",
                 "{\"query\":\"q\",\"title\":\"t\",\"grade\":\"Good\"}\n"
                 "{\"query\":\"q\",\"title\":\"t\",\"grade\":\"Great\"}\n");
  try {
    io::read_ratings(dir_ / "bad.jsonl");
    FAIL() << "expected FormatError";
  } catch (const io::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  io::write_text(dir_ / "zero.jsonl",
                 "{\"query\":\"q\",\"title_a\":\"a\",\"title_b\":\"b\",\"clicks_a\":0,\"clicks_b\":0}\n");
  EXPECT_THROW(io::read_session_pairs(dir_ / "zero.jsonl"), io::FormatError);
  EXPECT_THROW(io::read_text(dir_ / "missing.jsonl"), std::runtime_error);
}

}  // namespace
}  // namespace relnn
