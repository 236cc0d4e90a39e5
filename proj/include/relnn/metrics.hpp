// Ranking and classification metrics. Every metric returns std::nullopt when
// it is undefined on the given input.

#ifndef RELNN_METRICS_HPP_
#define RELNN_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace relnn::metrics {

// Mann-Whitney AUC: P(s+ > s-) + 0.5 P(s+ = s-). Labels are 0/1. Undefined
// without both classes.
std::optional<double> roc_auc(std::span<const double> scores,
                              std::span<const int> labels);

// AUC of a pairwise classifier whose examples arrive in preferred
// orientation: each logit x contributes x with label 1 and -x with label 0,
// as if every pair had been presented in both orders.
std::optional<double> pairwise_orientation_auc(std::span<const double> logits);

// Fraction of logits > 0, with 0 counted as half. Undefined when empty.
std::optional<double> pair_accuracy(std::span<const double> logits);

enum class Polarity { kPositive, kNegative };

// Average precision over descending scores; ties keep input order. The
// negative polarity flips labels and negates scores first.
std::optional<double> pr_auc(std::span<const double> scores,
                             std::span<const int> labels, Polarity polarity);

// Mean NDCG@k with gain 2^grade - 1 over per-query grade lists already in
// ranked order. Queries with zero ideal DCG are skipped.
std::optional<double> ndcg_at_k(const std::vector<std::vector<int>>& ranked_grades,
                                std::size_t k);

struct MapAndPrecision {
  std::optional<double> mean_avg_prec;
  std::optional<double> prec_at_k;
};

// MAP over queries with at least one positive; P@k over non-empty queries,
// using min(k, length) as the denominator.
MapAndPrecision map_and_prec_at_k(const std::vector<std::vector<int>>& ranked_labels,
                                  std::size_t k = 3);

struct MetricsReport {
  std::optional<double> roc_auc;
  std::optional<double> pair_accuracy;
  std::optional<double> pr_auc_pos;
  std::optional<double> pr_auc_neg;
  std::optional<double> ndcg_at_10;
  std::optional<double> mean_avg_prec;
  std::optional<double> prec_at_3;

  bool operator==(const MetricsReport&) const = default;
};

// Flat object keyed by metric name; undefined metrics are null.
nlohmann::ordered_json to_json(const MetricsReport& report);

// Full report over graded (query, item) judgments. Grades run 0 (worst) to 4
// (best); grades >= 2 count as relevant. Items are ranked per query by
// descending score with ties in input order.
MetricsReport evaluate_graded(std::span<const std::string> queries,
                              std::span<const int> grades,
                              std::span<const double> scores);

}  // namespace relnn::metrics

#endif  // RELNN_METRICS_HPP_
