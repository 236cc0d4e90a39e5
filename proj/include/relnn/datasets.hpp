// Click-log and ratings pipelines: sessions -> pair tuples -> aggregated,
// pruned session pairs, and query-level splits.

#ifndef RELNN_DATASETS_HPP_
#define RELNN_DATASETS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relnn/click_trainer.hpp"

namespace relnn {

struct DisplayedItem {
  std::string id;
  std::string title;
  std::uint32_t position = 0;
  bool clicked = false;

  bool operator==(const DisplayedItem&) const = default;
};

struct SessionRecord {
  std::string query;
  std::uint32_t day = 0;
  std::vector<DisplayedItem> items;  // strictly increasing positions

  bool operator==(const SessionRecord&) const = default;
};

struct ItemRef {
  std::string id;
  std::string title;

  bool operator==(const ItemRef&) const = default;
};

struct FiveTuple {
  std::string query;
  ItemRef item_a;
  ItemRef item_b;
  std::uint32_t click_a = 0;
  std::uint32_t click_b = 0;
  std::uint32_t day = 0;

  std::uint64_t click_sum() const { return std::uint64_t{click_a} + click_b; }
  bool operator==(const FiveTuple&) const = default;
};

// One 0/1 tuple per (upper, lower) displayed pair where either item was
// clicked; item_a is the upper one. Throws std::invalid_argument when
// positions are not strictly increasing.
std::vector<FiveTuple> sessions_to_tuples(const SessionRecord& record);

// Sums counts per (query, unordered item pair) over days in
// (last_day - window_days, last_day]; last_day defaults to the latest day in
// the input. Results are canonicalized (more clicks first, then ascending
// title, then ascending id), carry day = last_day, and are sorted by
// (query, title_a, title_b).
std::vector<FiveTuple> aggregate_tuples(std::span<const FiveTuple> tuples,
                                        std::uint32_t window_days = 180,
                                        std::optional<std::uint32_t> last_day = {});

// Per query, the k tuples with the largest click sum; ties by ascending
// (title_a, title_b). Output is grouped by ascending query.
std::vector<FiveTuple> retain_top_k(std::span<const FiveTuple> tuples,
                                    std::size_t k = 100);

// Tuples with at least one click, as canonical session pairs.
std::vector<SessionPair> to_session_pairs(std::span<const FiveTuple> tuples);

// Split index for each example. Distinct queries are ordered by a seeded hash
// and cut into consecutive runs with the given fractions, so every query
// lands in exactly one split. Fractions must be non-negative and sum to 1.
std::vector<std::size_t> assign_query_splits(std::span<const std::string> queries,
                                             std::span<const double> fractions,
                                             std::uint64_t seed);

template <typename Example>
std::vector<std::vector<Example>> split_by_query(std::span<const Example> examples,
                                                 std::span<const double> fractions,
                                                 std::uint64_t seed) {
  std::vector<std::string> queries;
  queries.reserve(examples.size());
  for (const auto& ex : examples) queries.push_back(ex.query);
  const auto assignment = assign_query_splits(queries, fractions, seed);
  std::vector<std::vector<Example>> splits(fractions.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    splits[assignment[i]].push_back(examples[i]);
  }
  return splits;
}

inline constexpr double kClickSplit[] = {0.9, 0.1};
inline constexpr double kRatingSplit[] = {0.65, 0.30, 0.05};

// Stable 64-bit hash of a string mixed with a seed.
std::uint64_t seeded_hash(std::string_view text, std::uint64_t seed);

}  // namespace relnn

#endif  // RELNN_DATASETS_HPP_
