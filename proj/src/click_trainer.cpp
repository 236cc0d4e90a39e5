#include "relnn/click_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "relnn/losses.hpp"
#include "relnn/metrics.hpp"

namespace relnn {

SessionPair make_session_pair(std::string query, std::string title_a,
                              std::string title_b, std::uint32_t clicks_a,
                              std::uint32_t clicks_b) {
  if (clicks_a == 0 && clicks_b == 0) {
    throw std::invalid_argument("session pair has no clicks");
  }
  const bool swap = clicks_b > clicks_a || (clicks_a == clicks_b && title_b < title_a);
  if (swap) {
    std::swap(title_a, title_b);
    std::swap(clicks_a, clicks_b);
  }
  return {std::move(query), std::move(title_a), std::move(title_b), clicks_a, clicks_b};
}

double session_label(const SessionPair& pair) {
  const double total = static_cast<double>(pair.clicks_pos) + pair.clicks_neg;
  if (total <= 0.0) throw std::invalid_argument("session pair has no clicks");
  return static_cast<double>(pair.clicks_pos) / total;
}

std::string bn_loss_name(BnLoss loss) {
  return loss == BnLoss::kHinge ? "hinge" : "logloss";
}

BnLoss parse_bn_loss(const std::string& name) {
  if (name == "logloss") return BnLoss::kLogloss;
  if (name == "hinge") return BnLoss::kHinge;
  throw std::invalid_argument("unknown batch-negative loss '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (bn_enabled && batch_size < 2) {
    throw std::invalid_argument("train: batch negatives need batch_size >= 2");
  }
  if (!(margin > 0.0)) throw std::invalid_argument("train: margin must be positive");
  if (!(optimizer.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
}

std::vector<EncodedPair> encode_pairs(std::span<const SessionPair> pairs,
                                      const Vocab& vocab) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    out.push_back({encode(pair.query, vocab), encode(pair.title_pos, vocab),
                   encode(pair.title_neg, vocab), session_label(pair)});
  }
  return out;
}

template <typename T>
T pairwise_logit(const TokenSeq& query, const TokenSeq& title_a,
                 const TokenSeq& title_b, const TowerParams<T>& params) {
  Tensor<T> features = Tensor<T>::matrix(2, 2 * params.embed_dim());
  const Tensor<T> a = pair_features(query, title_a, params.embedding);
  const Tensor<T> b = pair_features(query, title_b, params.embedding);
  std::copy(a.data().begin(), a.data().end(), features.row(0).begin());
  std::copy(b.data().begin(), b.data().end(), features.row(1).begin());
  const Tensor<T> out = batched_tower_forward(features, params);
  return out[0] - out[1];
}

template <typename T>
Tensor<T> row_cyclic_permute(const Tensor<T>& rows) {
  if (rows.rank() != 2 || rows.rows() < 1) {
    throw std::invalid_argument("row_cyclic_permute: need a non-empty matrix");
  }
  const std::size_t n = rows.rows();
  Tensor<T> out(rows.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = rows.row((i + n - 1) % n);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
ClickBatch<T> make_click_batch(std::span<const EncodedPair* const> pairs,
                               const Tensor<T>& table) {
  const std::size_t n = pairs.size();
  const std::size_t dim = table.cols();
  ClickBatch<T> batch{Tensor<T>::matrix(n, dim), Tensor<T>::matrix(n, dim),
                      Tensor<T>::matrix(n, dim), {}};
  batch.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto put = [&](Tensor<T>& dst, const TokenSeq& seq) {
      const Tensor<T> row = embed_bag(seq, table);
      std::copy(row.data().begin(), row.data().end(), dst.row(i).begin());
    };
    put(batch.queries, pairs[i]->query);
    put(batch.positives, pairs[i]->pos);
    put(batch.negatives, pairs[i]->neg);
    batch.labels.push_back(static_cast<T>(pairs[i]->label));
  }
  return batch;
}

namespace {

template <typename T>
Tensor<T> column_concat(const Tensor<T>& left, const Tensor<T>& right) {
  const std::size_t n = left.rows();
  Tensor<T> out = Tensor<T>::matrix(n, left.cols() + right.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.row(i);
    std::copy(left.row(i).begin(), left.row(i).end(), dst.begin());
    std::copy(right.row(i).begin(), right.row(i).end(),
              dst.begin() + static_cast<std::ptrdiff_t>(left.cols()));
  }
  return out;
}

template <typename T>
void append_rows(std::vector<T>& stacked, const Tensor<T>& block) {
  stacked.insert(stacked.end(), block.data().begin(), block.data().end());
}

}  // namespace

template <typename T>
BatchLogits<T> batch_forward_with_negatives(const ClickBatch<T>& batch,
                                            const TowerParams<T>& params) {
  const std::size_t n = batch.size();
  if (n < 2) {
    throw std::invalid_argument("batch negatives need at least 2 pairs, got " +
                                std::to_string(n));
  }
  const std::size_t width = 2 * params.embed_dim();
  std::vector<T> stacked;
  stacked.reserve((n + 1) * n * width);
  append_rows(stacked, column_concat(batch.queries, batch.positives));
  append_rows(stacked, column_concat(batch.queries, batch.negatives));
  Tensor<T> shifted = batch.positives;
  for (std::size_t k = 1; k < n; ++k) {
    shifted = row_cyclic_permute(shifted);
    append_rows(stacked, column_concat(batch.queries, shifted));
  }
  const Tensor<T> out =
      batched_tower_forward(Tensor<T>({(n + 1) * n, width}, std::move(stacked)), params);

  // RowEvenSplit into n + 1 blocks of n rows.
  BatchLogits<T> logits{Tensor<T>({n}), Tensor<T>({n * (n - 1)})};
  for (std::size_t i = 0; i < n; ++i) logits.original[i] = out[i] - out[n + i];
  for (std::size_t block = 2; block <= n; ++block) {
    for (std::size_t i = 0; i < n; ++i) {
      logits.bn[(block - 2) * n + i] = out[block * n + i] - out[i];
    }
  }
  return logits;
}

template <typename T>
Tensor<T> batch_forward_original(const ClickBatch<T>& batch, const TowerParams<T>& params) {
  const std::size_t n = batch.size();
  std::vector<T> stacked;
  stacked.reserve(2 * n * 2 * params.embed_dim());
  append_rows(stacked, column_concat(batch.queries, batch.positives));
  append_rows(stacked, column_concat(batch.queries, batch.negatives));
  const Tensor<T> out = batched_tower_forward(
      Tensor<T>({2 * n, 2 * params.embed_dim()}, std::move(stacked)), params);
  Tensor<T> logits({n});
  for (std::size_t i = 0; i < n; ++i) logits[i] = out[i] - out[n + i];
  return logits;
}

template <typename T>
T batch_loss(const Tensor<T>& original, std::span<const T> labels,
             const Tensor<T>* bn, const TrainConfig& config) {
  if (original.numel() != labels.size()) {
    throw std::invalid_argument("batch_loss: label count mismatch");
  }
  T total{0};
  for (std::size_t i = 0; i < labels.size(); ++i) total += logloss(original[i], labels[i]);
  if (bn) {
    const T margin = static_cast<T>(config.margin);
    for (std::size_t j = 0; j < bn->numel(); ++j) {
      total += config.bn_loss == BnLoss::kHinge ? hinge_neg((*bn)[j], margin)
                                                : logloss((*bn)[j], T{0});
    }
  }
  return total;
}

template <typename T>
BatchGraph build_batch_graph(Tape<T>& tape, Var table, const FeedForwardVars& head,
                             std::span<const EncodedPair* const> pairs,
                             const TrainConfig& config) {
  const std::size_t n = pairs.size();
  if (n < 1) throw std::invalid_argument("build_batch_graph: empty batch");
  if (config.bn_enabled && n < 2) {
    throw std::invalid_argument("batch negatives need at least 2 pairs");
  }
  std::vector<const TokenSeq*> queries, titles;
  std::vector<T> labels;
  for (const auto* pair : pairs) {
    queries.push_back(&pair->query);
    labels.push_back(static_cast<T>(pair->label));
  }
  for (const auto* pair : pairs) titles.push_back(&pair->pos);
  for (const auto* pair : pairs) titles.push_back(&pair->neg);

  const Var q = tape.embed_bag(table, std::span<const TokenSeq* const>(queries));
  const Var items = tape.embed_bag(table, std::span<const TokenSeq* const>(titles));

  // Row blocks: (q_i, pos_i), (q_i, neg_i), then (q_i, pos_{(i - k) mod n})
  // for k = 1 .. n - 1.
  const std::size_t blocks = config.bn_enabled ? n + 1 : 2;
  std::vector<std::uint32_t> qi, ti;
  qi.reserve(blocks * n);
  ti.reserve(blocks * n);
  for (std::size_t i = 0; i < n; ++i) {
    qi.push_back(static_cast<std::uint32_t>(i));
    ti.push_back(static_cast<std::uint32_t>(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    qi.push_back(static_cast<std::uint32_t>(i));
    ti.push_back(static_cast<std::uint32_t>(n + i));
  }
  for (std::size_t k = 1; k + 1 < blocks; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      qi.push_back(static_cast<std::uint32_t>(i));
      ti.push_back(static_cast<std::uint32_t>((i + n - k) % n));
    }
  }
  const Var scores = feed_forward_gathered(tape, head, q, std::move(qi), items, std::move(ti));

  BatchGraph graph;
  const Var own = tape.slice_rows(scores, 0, n);
  graph.original = tape.sub(own, tape.slice_rows(scores, n, n));
  graph.original_loss = tape.logloss_sum(graph.original, std::move(labels));
  graph.loss = graph.original_loss;
  if (config.bn_enabled) {
    const std::vector<Var> repeated(n - 1, own);
    graph.bn = tape.sub(tape.slice_rows(scores, 2 * n, n * (n - 1)),
                        tape.concat_rows(repeated));
    graph.bn_loss = config.bn_loss == BnLoss::kHinge
                        ? tape.hinge_neg_sum(graph.bn, static_cast<T>(config.margin))
                        : tape.logloss_sum(graph.bn, std::vector<T>(n * (n - 1), T{0}));
    graph.loss = tape.add(graph.original_loss, graph.bn_loss);
  }
  return graph;
}

ClickEval evaluate_click_model(std::span<const EncodedPair> pairs,
                               const TowerParams<float>& params,
                               const TrainConfig& config) {
  ClickEval result;
  if (pairs.empty()) return result;

  // Session pairs.
  const std::size_t count = std::min(pairs.size(), config.eval_max_pairs);
  std::vector<double> oriented;
  double loss_sum = 0.0;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t begin = 0; begin < count; begin += kChunk) {
    const std::size_t end = std::min(count, begin + kChunk);
    std::vector<const EncodedPair*> chunk;
    for (std::size_t i = begin; i < end; ++i) chunk.push_back(&pairs[i]);
    const auto batch = make_click_batch<float>(chunk, params.embedding);
    const Tensor<float> logits = batch_forward_original(batch, params);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      loss_sum += logloss<double>(logits[i], chunk[i]->label);
      if (chunk[i]->label > 0.5) oriented.push_back(logits[i]);
    }
  }
  result.orig_loss = loss_sum / static_cast<double>(count);
  result.orig_auc = metrics::pairwise_orientation_auc(oriented);
  result.pair_accuracy = metrics::pair_accuracy(oriented);

  // In-batch negatives over a fixed shuffle of the held-out pairs, so that
  // batches do not share queries by construction.
  const std::size_t n = std::max<std::size_t>(config.batch_size, 2);
  if (pairs.size() >= 2 && config.eval_bn_batches > 0) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t batch_n = std::min(n, pairs.size());
    const std::size_t batches =
        std::min(config.eval_bn_batches, pairs.size() / batch_n);
    std::vector<double> bn_oriented;
    double bn_loss_sum = 0.0;
    const float margin = static_cast<float>(config.margin);
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<const EncodedPair*> chunk;
      for (std::size_t i = 0; i < batch_n; ++i) chunk.push_back(&pairs[order[b * batch_n + i]]);
      const auto batch = make_click_batch<float>(chunk, params.embedding);
      const auto logits = batch_forward_with_negatives(batch, params);
      for (std::size_t j = 0; j < logits.bn.numel(); ++j) {
        const float x = logits.bn[j];
        bn_oriented.push_back(-static_cast<double>(x));
        bn_loss_sum += config.bn_loss == BnLoss::kHinge ? hinge_neg(x, margin)
                                                        : logloss(x, 0.0f);
      }
    }
    if (!bn_oriented.empty()) {
      result.bn_auc = metrics::pairwise_orientation_auc(bn_oriented);
      result.bn_loss = bn_loss_sum / static_cast<double>(bn_oriented.size());
    }
  }
  return result;
}

ClickTrainResult train_click_model(std::span<const EncodedPair> train,
                                   std::span<const EncodedPair> eval,
                                   std::size_t vocab_size,
                                   const TowerConfig& tower,
                                   const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("train_click_model: empty training set");
  if (config.bn_enabled && train.size() < 2) {
    throw std::invalid_argument("train_click_model: batch negatives need >= 2 pairs");
  }
  ClickTrainResult result{init_tower<float>(tower, vocab_size, tower.seed), {}};
  auto& params = result.params;

  const auto record = [&](std::size_t step) {
    if (eval.empty()) return;
    const ClickEval stats = evaluate_click_model(eval, params, config);
    result.history.push_back(
        {step, stats.orig_auc, stats.bn_auc, stats.orig_loss, stats.bn_loss});
  };
  if (config.steps == 0) return result;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n = std::min(config.batch_size, train.size());
  std::size_t cursor = 0;

  Optimizer<float> optimizer(config.optimizer);
  std::vector<Tensor<float>*> tensors{&params.embedding};
  for (auto& layer : params.head.layers) {
    tensors.push_back(&layer.weight);
    tensors.push_back(&layer.bias);
  }

  record(0);
  std::vector<const EncodedPair*> batch(n);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    // The short tail of an epoch is dropped and the order reshuffled.
    if (cursor + n > order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    for (std::size_t i = 0; i < n; ++i) batch[i] = &train[order[cursor + i]];
    cursor += n;

    Tape<float> tape;
    std::vector<Var> vars{tape.parameter(params.embedding)};
    const FeedForwardVars head = bind_feed_forward(tape, params.head);
    for (std::size_t l = 0; l < head.weights.size(); ++l) {
      vars.push_back(head.weights[l]);
      vars.push_back(head.biases[l]);
    }
    const BatchGraph graph = build_batch_graph(tape, vars.front(), head,
                                               std::span<const EncodedPair* const>(batch),
                                               config);
    tape.backward(graph.loss);
    std::vector<const Tensor<float>*> grads;
    for (const Var v : vars) grads.push_back(&tape.grad(v));
    optimizer.step(tensors, grads);

    if (config.eval_every > 0 && step % config.eval_every == 0 && step != config.steps) {
      record(step);
    }
  }
  if (!params.all_finite()) throw std::domain_error("training diverged: non-finite parameters");
  record(config.steps);
  return result;
}

void write_history_csv(std::span<const HistoryRow> history,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream s;
    s << std::setprecision(9) << *v;
    return s.str();
  };
  out << "step,orig_auc,bn_auc,orig_loss,bn_loss\n";
  for (const auto& row : history) {
    out << row.step << ',' << cell(row.orig_auc) << ',' << cell(row.bn_auc) << ','
        << cell(row.orig_loss) << ',' << cell(row.bn_loss) << '\n';
  }
}

#define RELNN_INSTANTIATE(T)                                                   \
  template T pairwise_logit<T>(const TokenSeq&, const TokenSeq&,               \
                               const TokenSeq&, const TowerParams<T>&);        \
  template Tensor<T> row_cyclic_permute<T>(const Tensor<T>&);                  \
  template ClickBatch<T> make_click_batch<T>(std::span<const EncodedPair* const>, \
                                             const Tensor<T>&);                \
  template BatchLogits<T> batch_forward_with_negatives<T>(const ClickBatch<T>&, \
                                                          const TowerParams<T>&); \
  template Tensor<T> batch_forward_original<T>(const ClickBatch<T>&,           \
                                               const TowerParams<T>&);         \
  template T batch_loss<T>(const Tensor<T>&, std::span<const T>,               \
                           const Tensor<T>*, const TrainConfig&);              \
  template BatchGraph build_batch_graph<T>(Tape<T>&, Var, const FeedForwardVars&, \
                                           std::span<const EncodedPair* const>, \
                                           const TrainConfig&);

RELNN_INSTANTIATE(float)
RELNN_INSTANTIATE(double)

#undef RELNN_INSTANTIATE

}  // namespace relnn
