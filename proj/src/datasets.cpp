#include "relnn/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace relnn {

std::vector<FiveTuple> sessions_to_tuples(const SessionRecord& record) {
  const auto& items = record.items;
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].position <= items[i - 1].position) {
      throw std::invalid_argument("session for query '" + record.query +
                                  "': positions must be strictly increasing");
    }
  }
  std::vector<FiveTuple> tuples;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (!items[i].clicked && !items[j].clicked) continue;
      tuples.push_back({record.query,
                        {items[i].id, items[i].title},
                        {items[j].id, items[j].title},
                        items[i].clicked ? 1u : 0u,
                        items[j].clicked ? 1u : 0u,
                        record.day});
    }
  }
  return tuples;
}

namespace {

// True when b should come before a in canonical order.
bool canonical_swap(const FiveTuple& t) {
  if (t.click_a != t.click_b) return t.click_b > t.click_a;
  if (t.item_a.title != t.item_b.title) return t.item_b.title < t.item_a.title;
  return t.item_b.id < t.item_a.id;
}

}  // namespace

std::vector<FiveTuple> aggregate_tuples(std::span<const FiveTuple> tuples,
                                        std::uint32_t window_days,
                                        std::optional<std::uint32_t> last_day) {
  if (tuples.empty()) return {};
  std::uint32_t end_day = 0;
  if (last_day) {
    end_day = *last_day;
  } else {
    for (const auto& t : tuples) end_day = std::max(end_day, t.day);
  }
  const std::int64_t first_day = static_cast<std::int64_t>(end_day) - window_days + 1;

  // Keyed by (query, lower id, upper id); counts oriented lower -> upper.
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, FiveTuple> sums;
  for (const auto& t : tuples) {
    if (t.day > end_day || static_cast<std::int64_t>(t.day) < first_day) continue;
    if (t.item_a.id == t.item_b.id) {
      throw std::invalid_argument("tuple pairs item '" + t.item_a.id + "' with itself");
    }
    const bool flip = t.item_b.id < t.item_a.id;
    const ItemRef& lo = flip ? t.item_b : t.item_a;
    const ItemRef& hi = flip ? t.item_a : t.item_b;
    auto [it, inserted] = sums.try_emplace(Key{t.query, lo.id, hi.id});
    FiveTuple& acc = it->second;
    if (inserted) acc = {t.query, lo, hi, 0, 0, end_day};
    acc.click_a += flip ? t.click_b : t.click_a;
    acc.click_b += flip ? t.click_a : t.click_b;
  }
  std::vector<FiveTuple> out;
  out.reserve(sums.size());
  for (auto& [key, t] : sums) {
    if (t.click_sum() == 0) continue;
    if (canonical_swap(t)) {
      std::swap(t.item_a, t.item_b);
      std::swap(t.click_a, t.click_b);
    }
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const FiveTuple& a, const FiveTuple& b) {
    return std::tie(a.query, a.item_a.title, a.item_b.title, a.item_a.id, a.item_b.id) <
           std::tie(b.query, b.item_a.title, b.item_b.title, b.item_a.id, b.item_b.id);
  });
  return out;
}

std::vector<FiveTuple> retain_top_k(std::span<const FiveTuple> tuples, std::size_t k) {
  if (k < 1) throw std::invalid_argument("retain_top_k: k must be >= 1");
  std::map<std::string, std::vector<const FiveTuple*>> by_query;
  for (const auto& t : tuples) by_query[t.query].push_back(&t);
  std::vector<FiveTuple> out;
  for (auto& [query, group] : by_query) {
    std::sort(group.begin(), group.end(), [](const FiveTuple* a, const FiveTuple* b) {
      if (a->click_sum() != b->click_sum()) return a->click_sum() > b->click_sum();
      return std::tie(a->item_a.title, a->item_b.title, a->item_a.id, a->item_b.id) <
             std::tie(b->item_a.title, b->item_b.title, b->item_a.id, b->item_b.id);
    });
    const std::size_t keep = std::min(k, group.size());
    for (std::size_t i = 0; i < keep; ++i) out.push_back(*group[i]);
  }
  return out;
}

std::vector<SessionPair> to_session_pairs(std::span<const FiveTuple> tuples) {
  std::vector<SessionPair> pairs;
  pairs.reserve(tuples.size());
  for (const auto& t : tuples) {
    if (t.click_sum() == 0) continue;
    pairs.push_back(make_session_pair(t.query, t.item_a.title, t.item_b.title,
                                      t.click_a, t.click_b));
  }
  return pairs;
}

std::uint64_t seeded_hash(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  // splitmix64 finalizer over the seed-mixed value.
  std::uint64_t z = h ^ (seed + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> assign_query_splits(std::span<const std::string> queries,
                                             std::span<const double> fractions,
                                             std::uint64_t seed) {
  if (fractions.empty()) throw std::invalid_argument("split: no fractions");
  double total = 0.0;
  for (const double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split: negative fraction");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }

  std::vector<std::pair<std::uint64_t, std::string>> distinct;
  {
    std::unordered_map<std::string_view, bool> seen;
    for (const auto& q : queries) {
      if (seen.emplace(q, true).second) distinct.emplace_back(seeded_hash(q, seed), q);
    }
  }
  std::sort(distinct.begin(), distinct.end());

  std::unordered_map<std::string, std::size_t> split_of;
  const double count = static_cast<double>(distinct.size());
  double cumulative = 0.0;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < fractions.size(); ++s) {
    cumulative += fractions[s];
    const std::size_t end = s + 1 == fractions.size()
                                ? distinct.size()
                                : std::min(distinct.size(),
                                           static_cast<std::size_t>(std::llround(cumulative * count)));
    for (std::size_t i = begin; i < end; ++i) split_of.emplace(distinct[i].second, s);
    begin = std::max(begin, end);
  }
  std::vector<std::size_t> assignment;
  assignment.reserve(queries.size());
  for (const auto& q : queries) assignment.push_back(split_of.at(q));
  return assignment;
}

}  // namespace relnn
