#include "relnn/synth_world.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "relnn/losses.hpp"
#include "relnn/text.hpp"

namespace relnn::synth {
namespace {

std::string numbered(char prefix, std::size_t index, std::size_t width) {
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool coin(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void index_world(World& world) {
  world.term_index.clear();
  world.alias_to_term.clear();
  for (std::uint32_t t = 0; t < world.terms.size(); ++t) {
    world.term_index.emplace(world.terms[t], t);
    if (!world.aliases[t].empty()) world.alias_to_term.emplace(world.aliases[t], t);
  }
  world.items_by_term.assign(world.terms.size(), {});
  for (const auto& item : world.items) {
    std::unordered_set<std::uint32_t> seen;
    for (const auto& token : tokenize(item.title)) {
      const auto it = world.term_index.find(token);
      if (it != world.term_index.end() && seen.insert(it->second).second) {
        world.items_by_term[it->second].push_back(item.id);
      }
    }
  }
}

}  // namespace

void WorldConfig::validate() const {
  if (n_terms < 50) throw std::invalid_argument("world: need at least 50 terms");
  if (n_items < 100) throw std::invalid_argument("world: need at least 100 items");
  if (n_queries < 1) throw std::invalid_argument("world: need at least 1 query");
  if (title_min < 1 || title_min > title_max || title_max > n_terms) {
    throw std::invalid_argument("world: bad title length range");
  }
  if (query_min < 1 || query_min > query_max || query_max > title_min) {
    throw std::invalid_argument("world: bad query length range");
  }
  if (!(alpha_sigma >= 0.0)) throw std::invalid_argument("world: alpha_sigma must be >= 0");
}

std::vector<std::int64_t> World::canonical_query(std::string_view query) const {
  std::vector<std::int64_t> ids;
  std::unordered_set<std::string> unknown;
  for (const auto& token : tokenize(query)) {
    std::int64_t id = -1;
    if (const auto it = term_index.find(token); it != term_index.end()) {
      id = it->second;
    } else if (const auto al = alias_to_term.find(token); al != alias_to_term.end()) {
      id = al->second;
    }
    if (id >= 0) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    } else if (unknown.insert(token).second) {
      ids.push_back(-1);
    }
  }
  return ids;
}

std::vector<std::uint32_t> World::relevant_items(std::string_view query) const {
  std::set<std::uint32_t> found;
  for (const auto id : canonical_query(query)) {
    if (id < 0) continue;
    const auto& list = items_by_term[static_cast<std::size_t>(id)];
    found.insert(list.begin(), list.end());
  }
  return {found.begin(), found.end()};
}

World gen_world(const WorldConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  World world;
  world.config = config;
  const std::size_t width = std::max<std::size_t>(4, std::to_string(config.n_terms).size());
  for (std::size_t t = 0; t < config.n_terms; ++t) {
    world.terms.push_back(numbered('w', t + 1, width));
    world.aliases.push_back(coin(rng, config.alias_prob) ? numbered('s', t + 1, width)
                                                         : std::string());
  }

  std::lognormal_distribution<double> alpha(0.0, config.alpha_sigma);
  std::vector<std::size_t> pool(config.n_terms);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::vector<std::vector<std::uint32_t>> item_terms;
  for (std::size_t i = 0; i < config.n_items; ++i) {
    const std::size_t len =
        std::uniform_int_distribution<std::size_t>(config.title_min, config.title_max)(rng);
    // Partial Fisher-Yates draw of distinct terms.
    std::vector<std::uint32_t> picked;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t j = k + uniform_index(rng, pool.size() - k);
      std::swap(pool[k], pool[j]);
      picked.push_back(static_cast<std::uint32_t>(pool[k]));
    }
    std::string title;
    for (const auto t : picked) {
      if (!title.empty()) title += ' ';
      title += world.terms[t];
    }
    world.items.push_back({static_cast<std::uint32_t>(i), std::move(title), alpha(rng)});
    item_terms.push_back(std::move(picked));
  }

  // Queries are drawn from a random item's title so every query has at
  // least one fully relevant item.
  std::unordered_set<std::string> seen;
  const std::size_t max_attempts = 50 * config.n_queries + 1000;
  for (std::size_t attempt = 0;
       world.queries.size() < config.n_queries && attempt < max_attempts; ++attempt) {
    auto terms = item_terms[uniform_index(rng, item_terms.size())];
    const std::size_t len =
        std::uniform_int_distribution<std::size_t>(config.query_min, config.query_max)(rng);
    std::string query;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t j = k + uniform_index(rng, terms.size() - k);
      std::swap(terms[k], terms[j]);
      const auto t = terms[k];
      const bool use_alias = !world.aliases[t].empty() && coin(rng, config.query_alias_prob);
      if (!query.empty()) query += ' ';
      query += use_alias ? world.aliases[t] : world.terms[t];
    }
    if (seen.insert(query).second) world.queries.push_back(std::move(query));
  }
  index_world(world);
  return world;
}

double oracle_relevance(std::string_view query, std::string_view title, const World& world) {
  const auto canon = world.canonical_query(query);
  if (canon.empty()) return 0.0;
  std::unordered_set<std::string> title_terms;
  for (auto& token : tokenize(title)) title_terms.insert(std::move(token));
  std::size_t hits = 0;
  for (const auto id : canon) {
    if (id >= 0 && title_terms.count(world.terms[static_cast<std::size_t>(id)])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(canon.size());
}

double click_probability(double relevance, double attractiveness,
                         const SessionConfig& config) {
  return sigmoid(config.click_slope * (relevance - config.click_center) +
                 config.alpha_weight * std::log(attractiveness));
}

std::vector<SessionRecord> simulate_sessions(const World& world, std::size_t n_sessions,
                                             std::uint64_t seed,
                                             const SessionConfig& config) {
  if (world.queries.empty()) throw std::invalid_argument("simulate_sessions: no queries");
  const std::size_t shown = std::min(config.displayed, world.items.size());
  std::vector<std::vector<std::uint32_t>> relevant;
  relevant.reserve(world.queries.size());
  for (const auto& q : world.queries) relevant.push_back(world.relevant_items(q));

  std::mt19937_64 rng(seed);
  std::vector<SessionRecord> sessions;
  sessions.reserve(n_sessions);
  for (std::size_t s = 0; s < n_sessions; ++s) {
    const std::size_t qi = uniform_index(rng, world.queries.size());
    SessionRecord record;
    record.query = world.queries[qi];
    record.day = static_cast<std::uint32_t>(uniform_index(rng, std::max<std::uint32_t>(config.n_days, 1)));
    const auto& rel = relevant[qi];
    std::unordered_set<std::uint32_t> used;
    std::size_t rel_left = rel.size();
    while (record.items.size() < shown) {
      std::uint32_t id;
      if (rel_left > 0 && coin(rng, config.relevant_share)) {
        id = rel[uniform_index(rng, rel.size())];
      } else {
        id = world.items[uniform_index(rng, world.items.size())].id;
      }
      if (!used.insert(id).second) continue;
      if (std::binary_search(rel.begin(), rel.end(), id)) --rel_left;
      const Item& item = world.items[id];
      const double r = oracle_relevance(record.query, item.title, world);
      const bool clicked = coin(rng, click_probability(r, item.attractiveness, config));
      record.items.push_back({std::to_string(item.id), item.title,
                              static_cast<std::uint32_t>(record.items.size() + 1), clicked});
    }
    sessions.push_back(std::move(record));
  }
  return sessions;
}

Grade grade_for_relevance(double relevance) {
  if (relevance < 0.2) return Grade::kBad;
  if (relevance < 0.4) return Grade::kFair;
  if (relevance < 0.6) return Grade::kGood;
  if (relevance < 0.8) return Grade::kExcellent;
  return Grade::kPerfect;
}

std::vector<RatingExample> gen_ratings(const World& world, std::size_t n, std::uint64_t seed,
                                       const RatingConfig& config) {
  if (world.queries.empty()) throw std::invalid_argument("gen_ratings: no queries");
  std::mt19937_64 rng(seed);
  std::vector<RatingExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& query = world.queries[uniform_index(rng, world.queries.size())];
    const auto rel = world.relevant_items(query);
    const Item& item = !rel.empty() && coin(rng, config.relevant_share)
                           ? world.items[rel[uniform_index(rng, rel.size())]]
                           : world.items[uniform_index(rng, world.items.size())];
    Grade grade = grade_for_relevance(oracle_relevance(query, item.title, world));
    if (config.noise && coin(rng, config.noise_rate)) {
      grade = static_cast<Grade>(uniform_index(rng, 5));
    }
    out.push_back({query, item.title, grade});
  }
  return out;
}

nlohmann::ordered_json world_config_to_json(const WorldConfig& c) {
  return {{"n_terms", c.n_terms},         {"n_items", c.n_items},
          {"n_queries", c.n_queries},     {"alias_prob", c.alias_prob},
          {"query_alias_prob", c.query_alias_prob},
          {"title_min", c.title_min},     {"title_max", c.title_max},
          {"query_min", c.query_min},     {"query_max", c.query_max},
          {"alpha_sigma", c.alpha_sigma}, {"seed", c.seed}};
}

WorldConfig world_config_from_json(const nlohmann::ordered_json& json) {
  WorldConfig c;
  c.n_terms = json.value("n_terms", c.n_terms);
  c.n_items = json.value("n_items", c.n_items);
  c.n_queries = json.value("n_queries", c.n_queries);
  c.alias_prob = json.value("alias_prob", c.alias_prob);
  c.query_alias_prob = json.value("query_alias_prob", c.query_alias_prob);
  c.title_min = json.value("title_min", c.title_min);
  c.title_max = json.value("title_max", c.title_max);
  c.query_min = json.value("query_min", c.query_min);
  c.query_max = json.value("query_max", c.query_max);
  c.alpha_sigma = json.value("alpha_sigma", c.alpha_sigma);
  c.seed = json.value("seed", c.seed);
  return c;
}

nlohmann::ordered_json world_to_json(const World& world) {
  nlohmann::ordered_json synonyms = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < world.terms.size(); ++t) {
    if (!world.aliases[t].empty()) synonyms[world.aliases[t]] = world.terms[t];
  }
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& item : world.items) {
    items.push_back({{"id", item.id}, {"title", item.title}, {"alpha", item.attractiveness}});
  }
  return {{"config", world_config_to_json(world.config)},
          {"terms", world.terms},
          {"synonyms", std::move(synonyms)},
          {"items", std::move(items)},
          {"queries", world.queries}};
}

World world_from_json(const nlohmann::ordered_json& json) {
  World world;
  world.config = world_config_from_json(json.at("config"));
  world.terms = json.at("terms").get<std::vector<std::string>>();
  world.aliases.assign(world.terms.size(), {});
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < world.terms.size(); ++t) index.emplace(world.terms[t], t);
  for (const auto& [alias, canonical] : json.at("synonyms").items()) {
    const auto it = index.find(canonical.get<std::string>());
    if (it == index.end()) throw std::invalid_argument("world: synonym of unknown term");
    world.aliases[it->second] = alias;
  }
  for (const auto& item : json.at("items")) {
    const auto id = item.at("id").get<std::uint32_t>();
    if (id != world.items.size()) throw std::invalid_argument("world: item ids must be dense");
    world.items.push_back({id, item.at("title").get<std::string>(), item.at("alpha").get<double>()});
  }
  world.queries = json.at("queries").get<std::vector<std::string>>();
  index_world(world);
  return world;
}

}  // namespace relnn::synth
