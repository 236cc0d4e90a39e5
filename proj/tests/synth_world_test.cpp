#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "relnn/synth_world.hpp"
#include "relnn/text.hpp"

namespace relnn::synth {
namespace {

WorldConfig small_config() {
  WorldConfig c;
  c.n_terms = 300;
  c.n_items = 1000;
  c.n_queries = 200;
  c.seed = 9;
  return c;
}

const World& small_world() {
  static const World w = gen_world(small_config());
  return w;
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

TEST(GenWorld, Deterministic) {
  EXPECT_EQ(world_to_json(gen_world(small_config())).dump(),
            world_to_json(small_world()).dump());
  WorldConfig other = small_config();
  other.seed = 10;
  EXPECT_NE(world_to_json(gen_world(other)).dump(), world_to_json(small_world()).dump());
}

TEST(GenWorld, CatalogInvariants) {
  const World& w = small_world();
  ASSERT_EQ(w.terms.size(), 300u);
  ASSERT_EQ(w.items.size(), 1000u);
  EXPECT_EQ(w.terms[0], "w0001");
  std::size_t aliased = 0;
  for (std::size_t t = 0; t < w.terms.size(); ++t) {
    if (w.aliases[t].empty()) continue;
    ++aliased;
    EXPECT_EQ(w.alias_to_term.at(w.aliases[t]), t);
    EXPECT_FALSE(w.term_index.contains(w.aliases[t]));
  }
  EXPECT_NEAR(static_cast<double>(aliased) / 300.0, 0.3, 0.08);
  for (const auto& item : w.items) {
    const auto ws = words(item.title);
    EXPECT_GE(ws.size(), 3u);
    EXPECT_LE(ws.size(), 8u);
    EXPECT_EQ(std::set<std::string>(ws.begin(), ws.end()).size(), ws.size());
    for (const auto& t : ws) EXPECT_TRUE(w.term_index.contains(t)) << t;
    EXPECT_GT(item.attractiveness, 0.0);
  }
}

TEST(GenWorld, QueriesAreDistinctAndAnswerable) {
  const World& w = small_world();
  ASSERT_EQ(w.queries.size(), 200u);
  EXPECT_EQ(std::set<std::string>(w.queries.begin(), w.queries.end()).size(), 200u);
  bool saw_alias = false;
  for (const auto& q : w.queries) {
    const auto ws = words(q);
    EXPECT_GE(ws.size(), 1u);
    EXPECT_LE(ws.size(), 3u);
    for (const auto& t : ws) saw_alias |= w.alias_to_term.contains(t);
    for (const auto id : w.canonical_query(q)) EXPECT_GE(id, 0);
    EXPECT_FALSE(w.relevant_items(q).empty()) << q;
  }
  EXPECT_TRUE(saw_alias);
}

TEST(GenWorld, AttractivenessIsLogNormal) {
  WorldConfig c;
  c.n_items = 10000;
  c.n_queries = 10;
  const World w = gen_world(c);
  double sum = 0.0, sq = 0.0;
  for (const auto& item : w.items) {
    const double l = std::log(item.attractiveness);
    sum += l;
    sq += l * l;
  }
  const double mean = sum / 10000.0;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(sq / 10000.0 - mean * mean), 0.5, 0.02);
}

TEST(GenWorld, RejectsTinyWorlds) {
  WorldConfig c;
  c.n_terms = 49;
  EXPECT_THROW(gen_world(c), std::invalid_argument);
  c = {};
  c.n_items = 99;
  EXPECT_THROW(gen_world(c), std::invalid_argument);
}

TEST(OracleRelevance, FractionOfCanonicalTerms) {
  const World& w = small_world();
  std::size_t t = 0;
  while (w.aliases[t].empty()) ++t;
  const std::string& term = w.terms[t];
  const std::string& alias = w.aliases[t];
  const std::string other = w.terms[(t + 1) % w.terms.size()];
  const std::string title = term + " " + w.terms[(t + 2) % w.terms.size()];
  EXPECT_EQ(oracle_relevance(term, title, w), 1.0);
  EXPECT_EQ(oracle_relevance(alias, title, w), 1.0);
  EXPECT_EQ(oracle_relevance(alias + " " + other, title, w), 0.5);
  EXPECT_EQ(oracle_relevance(term + " zzz", title, w), 0.5);
  EXPECT_EQ(oracle_relevance(other, title, w), 0.0);
  EXPECT_EQ(oracle_relevance("", title, w), 0.0);
  // Adding a matching title term never lowers relevance.
  EXPECT_GE(oracle_relevance(term + " " + other, title + " " + other, w),
            oracle_relevance(term + " " + other, title, w));
}

TEST(ClickProbability, ClosedForms) {
  EXPECT_DOUBLE_EQ(click_probability(0.4, 1.0), 0.5);
  EXPECT_NEAR(click_probability(1.0, 1.0), 0.8176, 1e-4);
  EXPECT_NEAR(click_probability(0.4, std::exp(1.25)), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_GT(click_probability(0.5, 2.0), click_probability(0.5, 1.0));
  EXPECT_GT(click_probability(0.6, 1.0), click_probability(0.5, 1.0));
}

TEST(SimulateSessions, ShapeAndDeterminism) {
  const World& w = small_world();
  const auto a = simulate_sessions(w, 500, 4);
  EXPECT_EQ(a, simulate_sessions(w, 500, 4));
  std::set<std::string> pool(w.queries.begin(), w.queries.end());
  for (const auto& s : a) {
    EXPECT_TRUE(pool.contains(s.query));
    EXPECT_LT(s.day, 180u);
    ASSERT_EQ(s.items.size(), 10u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      EXPECT_EQ(s.items[i].position, i + 1);
      ids.insert(s.items[i].id);
      const auto& item = w.items[std::stoul(s.items[i].id)];
      EXPECT_EQ(s.items[i].title, item.title);
    }
    EXPECT_EQ(ids.size(), 10u);
  }
}

TEST(SimulateSessions, ClickRateMatchesModel) {
  const World& w = small_world();
  const auto sessions = simulate_sessions(w, 5000, 12);
  double clicks = 0.0, expected = 0.0, displayed = 0.0, relevant = 0.0;
  for (const auto& s : sessions) {
    for (const auto& d : s.items) {
      const auto& item = w.items[std::stoul(d.id)];
      const double r = oracle_relevance(s.query, item.title, w);
      clicks += d.clicked;
      expected += click_probability(r, item.attractiveness);
      relevant += r > 0.0;
      displayed += 1.0;
    }
  }
  EXPECT_NEAR(clicks / displayed, expected / displayed, 0.02);
  // About 70% of slots are drawn from the relevant set, plus uniform hits.
  EXPECT_GT(relevant / displayed, 0.6);
}

TEST(Grades, Bins) {
  EXPECT_EQ(grade_for_relevance(0.0), Grade::kBad);
  EXPECT_EQ(grade_for_relevance(0.19), Grade::kBad);
  EXPECT_EQ(grade_for_relevance(0.2), Grade::kFair);
  EXPECT_EQ(grade_for_relevance(0.5), Grade::kGood);
  EXPECT_EQ(grade_for_relevance(0.6), Grade::kExcellent);
  EXPECT_EQ(grade_for_relevance(0.8), Grade::kPerfect);
  EXPECT_EQ(grade_for_relevance(1.0), Grade::kPerfect);
}

TEST(GenRatings, NoiseFreeGradesFollowRelevance) {
  const World& w = small_world();
  RatingConfig clean;
  clean.noise = false;
  const auto ratings = gen_ratings(w, 2000, 5, clean);
  ASSERT_EQ(ratings.size(), 2000u);
  std::size_t good = 0;
  for (const auto& r : ratings) {
    EXPECT_EQ(r.grade, grade_for_relevance(oracle_relevance(r.query, r.title, w)));
    good += binarize_rating(r.grade);
  }
  EXPECT_GT(good, 600u);
  EXPECT_LT(good, 1400u);

  const auto noisy = gen_ratings(w, 2000, 5);
  std::size_t changed = 0;
  for (const auto& r : noisy) {
    changed += r.grade != grade_for_relevance(oracle_relevance(r.query, r.title, w));
  }
  // Re-grading is uniform over five grades, so 4/5 of it shows.
  EXPECT_NEAR(static_cast<double>(changed) / 2000.0, 0.05 * 0.8, 0.015);
  EXPECT_EQ(noisy, gen_ratings(w, 2000, 5));
}

TEST(WorldJson, RoundTrip) {
  const World& w = small_world();
  const auto json = world_to_json(w);
  const World back = world_from_json(json);
  EXPECT_EQ(world_to_json(back).dump(), json.dump());
  EXPECT_EQ(back.relevant_items(w.queries[0]), w.relevant_items(w.queries[0]));
  EXPECT_EQ(world_config_to_json(world_config_from_json(world_config_to_json(w.config))),
            world_config_to_json(w.config));
}

}  // namespace
}  // namespace relnn::synth
