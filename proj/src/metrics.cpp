#include "relnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace relnn::metrics {
namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

void check_scores(std::span<const double> scores, const char* what) {
  for (const double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument(std::string(what) + ": NaN score");
  }
}

// Indices sorted by descending score, ties in input order.
std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels) {
  const auto order = rank_descending(scores);
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0.0) return std::nullopt;
  return sum / hits;
}

}  // namespace

std::optional<double> roc_auc(std::span<const double> scores,
                              std::span<const int> labels) {
  check_sizes(scores.size(), labels.size(), "roc_auc");
  check_scores(scores, "roc_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney count, kept integral so the result is exact.
  std::uint64_t twice_wins = 0;
  std::uint64_t negatives_below = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    twice_wins += pos * (2 * negatives_below + neg);
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) return std::nullopt;
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::optional<double> pairwise_orientation_auc(std::span<const double> logits) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(2 * logits.size());
  labels.reserve(2 * logits.size());
  for (const double x : logits) {
    scores.push_back(x);
    labels.push_back(1);
  }
  for (const double x : logits) {
    scores.push_back(-x);
    labels.push_back(0);
  }
  return roc_auc(scores, labels);
}

std::optional<double> pair_accuracy(std::span<const double> logits) {
  check_scores(logits, "pair_accuracy");
  if (logits.empty()) return std::nullopt;
  double credit = 0.0;
  for (const double x : logits) credit += x > 0.0 ? 1.0 : (x == 0.0 ? 0.5 : 0.0);
  return credit / static_cast<double>(logits.size());
}

std::optional<double> pr_auc(std::span<const double> scores,
                             std::span<const int> labels, Polarity polarity) {
  check_sizes(scores.size(), labels.size(), "pr_auc");
  check_scores(scores, "pr_auc");
  if (polarity == Polarity::kPositive) return average_precision(scores, labels);
  std::vector<double> flipped_scores(scores.size());
  std::vector<int> flipped_labels(labels.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    flipped_scores[i] = -scores[i];
    flipped_labels[i] = labels[i] == 1 ? 0 : 1;
  }
  return average_precision(flipped_scores, flipped_labels);
}

std::optional<double> ndcg_at_k(const std::vector<std::vector<int>>& ranked_grades,
                                std::size_t k) {
  const auto dcg = [k](const std::vector<int>& grades) {
    double total = 0.0;
    for (std::size_t r = 0; r < std::min(k, grades.size()); ++r) {
      total += (std::exp2(static_cast<double>(grades[r])) - 1.0) /
               std::log2(static_cast<double>(r + 2));
    }
    return total;
  };
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& grades : ranked_grades) {
    std::vector<int> ideal = grades;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double ideal_dcg = dcg(ideal);
    if (ideal_dcg <= 0.0) continue;
    sum += dcg(grades) / ideal_dcg;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / static_cast<double>(counted);
}

MapAndPrecision map_and_prec_at_k(const std::vector<std::vector<int>>& ranked_labels,
                                  std::size_t k) {
  if (k < 1) throw std::invalid_argument("map_and_prec_at_k: k must be >= 1");
  double ap_sum = 0.0;
  std::size_t ap_count = 0;
  double prec_sum = 0.0;
  std::size_t prec_count = 0;
  for (const auto& labels : ranked_labels) {
    if (labels.empty()) continue;
    double hits = 0.0;
    double ap = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == 1) {
        hits += 1.0;
        ap += hits / static_cast<double>(r + 1);
      }
    }
    if (hits > 0.0) {
      ap_sum += ap / hits;
      ++ap_count;
    }
    const std::size_t depth = std::min(k, labels.size());
    const auto top_hits = std::count(labels.begin(), labels.begin() +
                                     static_cast<std::ptrdiff_t>(depth), 1);
    prec_sum += static_cast<double>(top_hits) / static_cast<double>(depth);
    ++prec_count;
  }
  MapAndPrecision out;
  if (ap_count > 0) out.mean_avg_prec = ap_sum / static_cast<double>(ap_count);
  if (prec_count > 0) out.prec_at_k = prec_sum / static_cast<double>(prec_count);
  return out;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  const auto put = [&](const char* name, const std::optional<double>& value) {
    out[name] = value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
  };
  put("roc_auc", report.roc_auc);
  put("pair_accuracy", report.pair_accuracy);
  put("pr_auc_pos", report.pr_auc_pos);
  put("pr_auc_neg", report.pr_auc_neg);
  put("ndcg_at_10", report.ndcg_at_10);
  put("mean_avg_prec", report.mean_avg_prec);
  put("prec_at_3", report.prec_at_3);
  return out;
}

MetricsReport evaluate_graded(std::span<const std::string> queries,
                              std::span<const int> grades,
                              std::span<const double> scores) {
  check_sizes(queries.size(), grades.size(), "evaluate_graded");
  check_sizes(queries.size(), scores.size(), "evaluate_graded");
  std::vector<int> binary(grades.size());
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] < 0 || grades[i] > 4) {
      throw std::invalid_argument("evaluate_graded: grade out of range");
    }
    binary[i] = grades[i] >= 2 ? 1 : 0;
  }

  // Group by query in order of first appearance.
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto [it, inserted] = group_of.emplace(queries[i], groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  std::vector<std::vector<int>> ranked_grades;
  std::vector<std::vector<int>> ranked_binary;
  std::vector<double> pair_logits;
  for (const auto& members : groups) {
    std::vector<double> member_scores;
    for (const auto i : members) member_scores.push_back(scores[i]);
    const auto order = rank_descending(member_scores);
    auto& g = ranked_grades.emplace_back();
    auto& b = ranked_binary.emplace_back();
    for (const auto pos : order) {
      g.push_back(grades[members[pos]]);
      b.push_back(binary[members[pos]]);
    }
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const auto a = members[x], c = members[y];
        if (grades[a] == grades[c]) continue;
        pair_logits.push_back(grades[a] > grades[c] ? scores[a] - scores[c]
                                                    : scores[c] - scores[a]);
      }
    }
  }

  MetricsReport report;
  report.roc_auc = roc_auc(scores, binary);
  report.pair_accuracy = pair_accuracy(pair_logits);
  report.pr_auc_pos = pr_auc(scores, binary, Polarity::kPositive);
  report.pr_auc_neg = pr_auc(scores, binary, Polarity::kNegative);
  report.ndcg_at_10 = ndcg_at_k(ranked_grades, 10);
  const auto map_prec = map_and_prec_at_k(ranked_binary, 3);
  report.mean_avg_prec = map_prec.mean_avg_prec;
  report.prec_at_3 = map_prec.prec_at_k;
  return report;
}

}  // namespace relnn::metrics
