// Stage-1 training: Siamese pairwise loss on click session pairs, augmented
// with in-batch negatives.

#ifndef RELNN_CLICK_TRAINER_HPP_
#define RELNN_CLICK_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relnn/optim.hpp"
#include "relnn/tape.hpp"
#include "relnn/tensor.hpp"
#include "relnn/text.hpp"
#include "relnn/tower.hpp"

namespace relnn {

// A co-displayed title pair under one query with aggregated click counts.
// Always held in canonical order: clicks_pos >= clicks_neg, ties broken by
// ascending title.
struct SessionPair {
  std::string query;
  std::string title_pos;
  std::string title_neg;
  std::uint32_t clicks_pos = 0;
  std::uint32_t clicks_neg = 0;

  bool operator==(const SessionPair&) const = default;
};

// Canonicalizes (a, b). Throws std::invalid_argument when both counts are 0.
SessionPair make_session_pair(std::string query, std::string title_a,
                              std::string title_b, std::uint32_t clicks_a,
                              std::uint32_t clicks_b);

// Click ratio of the preferred title, always >= 0.5.
double session_label(const SessionPair& pair);

enum class BnLoss { kLogloss, kHinge };

std::string bn_loss_name(BnLoss loss);
BnLoss parse_bn_loss(const std::string& name);

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t steps = 1000;
  bool bn_enabled = true;
  BnLoss bn_loss = BnLoss::kLogloss;
  double margin = 1.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  // History cadence in steps; 0 records only the final step.
  std::size_t eval_every = 100;
  // Held-out batches used for the batch-negative metrics.
  std::size_t eval_bn_batches = 4;
  // Cap on held-out pairs used for the session-pair metrics.
  std::size_t eval_max_pairs = 20000;

  void validate() const;
};

struct EncodedPair {
  TokenSeq query;
  TokenSeq pos;
  TokenSeq neg;
  double label = 0.5;
};

std::vector<EncodedPair> encode_pairs(std::span<const SessionPair> pairs,
                                      const Vocab& vocab);

// H(q, a) - H(q, b).
template <typename T>
T pairwise_logit(const TokenSeq& query, const TokenSeq& title_a,
                 const TokenSeq& title_b, const TowerParams<T>& params);

// Row i of the result is row (i - 1) mod n of the input.
template <typename T>
Tensor<T> row_cyclic_permute(const Tensor<T>& rows);

// Embedding-bag outputs for one mini-batch, rows aligned.
template <typename T>
struct ClickBatch {
  Tensor<T> queries;    // [n, d]
  Tensor<T> positives;  // [n, d]
  Tensor<T> negatives;  // [n, d]
  std::vector<T> labels;

  std::size_t size() const { return queries.rows(); }
};

template <typename T>
ClickBatch<T> make_click_batch(std::span<const EncodedPair* const> pairs,
                               const Tensor<T>& table);

template <typename T>
struct BatchLogits {
  Tensor<T> original;  // [n]
  Tensor<T> bn;        // [n (n - 1)]; block k-1 pairs query i with positive (i - k) mod n
};

// Batch-negative augmented forward pass: builds the n + 1 feature blocks,
// runs the tower once over all of them and splits the output. Requires n >= 2.
template <typename T>
BatchLogits<T> batch_forward_with_negatives(const ClickBatch<T>& batch,
                                            const TowerParams<T>& params);

// Original logits only; any n >= 1.
template <typename T>
Tensor<T> batch_forward_original(const ClickBatch<T>& batch, const TowerParams<T>& params);

// Sum of logloss over original pairs plus the batch-negative term (logloss
// with label 0, or hinge) when `bn` is non-null.
template <typename T>
T batch_loss(const Tensor<T>& original, std::span<const T> labels,
             const Tensor<T>* bn, const TrainConfig& config);

// Differentiable version of batch_forward_with_negatives + batch_loss. The
// first hidden layer is evaluated in factorized form, which gives the same
// rows as the stacked feature blocks.
struct BatchGraph {
  Var loss;
  Var original_loss;
  Var bn_loss;  // invalid when batch negatives are off
  Var original;
  Var bn;       // invalid when batch negatives are off
};

template <typename T>
BatchGraph build_batch_graph(Tape<T>& tape, Var table, const FeedForwardVars& head,
                             std::span<const EncodedPair* const> pairs,
                             const TrainConfig& config);

struct HistoryRow {
  std::size_t step = 0;
  std::optional<double> orig_auc;
  std::optional<double> bn_auc;
  double orig_loss = 0.0;
  double bn_loss = 0.0;
};

struct ClickEval {
  std::optional<double> orig_auc;
  std::optional<double> bn_auc;
  std::optional<double> pair_accuracy;
  double orig_loss = 0.0;
  double bn_loss = 0.0;
};

// Session-pair metrics on held-out pairs: orientation AUC over pairs with
// label > 0.5, and the same AUC over in-batch negatives of shuffled batches.
ClickEval evaluate_click_model(std::span<const EncodedPair> pairs,
                               const TowerParams<float>& params,
                               const TrainConfig& config);

struct ClickTrainResult {
  TowerParams<float> params;
  std::vector<HistoryRow> history;
};

// Throws std::invalid_argument on an empty training set.
ClickTrainResult train_click_model(std::span<const EncodedPair> train,
                                   std::span<const EncodedPair> eval,
                                   std::size_t vocab_size,
                                   const TowerConfig& tower,
                                   const TrainConfig& config);

// Columns: step,orig_auc,bn_auc,orig_loss,bn_loss.
void write_history_csv(std::span<const HistoryRow> history,
                       const std::filesystem::path& path);

}  // namespace relnn

#endif  // RELNN_CLICK_TRAINER_HPP_
