// Deterministic synthetic catalog, query pool and user/rater simulators with
// a known relevance function.

#ifndef RELNN_SYNTH_WORLD_HPP_
#define RELNN_SYNTH_WORLD_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "relnn/datasets.hpp"
#include "relnn/finetune.hpp"

namespace relnn::synth {

struct WorldConfig {
  std::size_t n_terms = 2000;
  std::size_t n_items = 5000;
  std::size_t n_queries = 2000;
  double alias_prob = 0.3;        // chance a term has a synonym
  double query_alias_prob = 0.5;  // chance a query term is replaced by it
  std::size_t title_min = 3;
  std::size_t title_max = 8;
  std::size_t query_min = 1;
  std::size_t query_max = 3;
  double alpha_sigma = 0.5;  // attractiveness ~ LogNormal(0, alpha_sigma)
  std::uint64_t seed = 1;

  void validate() const;
};

struct Item {
  std::uint32_t id = 0;
  std::string title;
  double attractiveness = 1.0;
};

struct World {
  WorldConfig config;
  std::vector<std::string> terms;    // canonical, "w0001" ...
  std::vector<std::string> aliases;  // per term; empty when none
  std::unordered_map<std::string, std::uint32_t> alias_to_term;
  std::unordered_map<std::string, std::uint32_t> term_index;
  std::vector<Item> items;
  std::vector<std::string> queries;

  // Canonical term ids of a query, deduplicated, in order of appearance.
  // Unknown tokens map to -1 entries so they count against relevance.
  std::vector<std::int64_t> canonical_query(std::string_view query) const;
  // Items sharing at least one canonical term with the query.
  std::vector<std::uint32_t> relevant_items(std::string_view query) const;

  std::vector<std::vector<std::uint32_t>> items_by_term;
};

// Throws std::invalid_argument when n_terms < 50 or n_items < 100.
World gen_world(const WorldConfig& config);

// Fraction of the query's canonical terms present in the title; 0 for an
// empty query.
double oracle_relevance(std::string_view query, std::string_view title, const World& world);

struct SessionConfig {
  std::size_t displayed = 10;
  double relevant_share = 0.7;
  double click_slope = 2.5;
  double click_center = 0.4;
  double alpha_weight = 0.8;
  std::uint32_t n_days = 180;
};

// sigmoid(slope (r - center) + alpha_weight ln(alpha)).
double click_probability(double relevance, double attractiveness,
                         const SessionConfig& config = {});

std::vector<SessionRecord> simulate_sessions(const World& world, std::size_t n_sessions,
                                             std::uint64_t seed,
                                             const SessionConfig& config = {});

struct RatingConfig {
  double relevant_share = 0.5;
  bool noise = true;
  double noise_rate = 0.05;
};

// Bins: [0,.2) Bad, [.2,.4) Fair, [.4,.6) Good, [.6,.8) Excellent, [.8,1] Perfect.
Grade grade_for_relevance(double relevance);

std::vector<RatingExample> gen_ratings(const World& world, std::size_t n,
                                       std::uint64_t seed,
                                       const RatingConfig& config = {});

nlohmann::ordered_json world_config_to_json(const WorldConfig& config);
WorldConfig world_config_from_json(const nlohmann::ordered_json& json);

// Full world (config, synonyms, catalog, query pool).
nlohmann::ordered_json world_to_json(const World& world);
World world_from_json(const nlohmann::ordered_json& json);

}  // namespace relnn::synth

#endif  // RELNN_SYNTH_WORLD_HPP_
