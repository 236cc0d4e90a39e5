#include "relnn/finetune.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "relnn/tape.hpp"

namespace relnn {

Grade parse_grade(std::string_view name) {
  if (name == "Perfect") return Grade::kPerfect;
  if (name == "Excellent") return Grade::kExcellent;
  if (name == "Good") return Grade::kGood;
  if (name == "Fair") return Grade::kFair;
  if (name == "Bad") return Grade::kBad;
  throw std::invalid_argument("unknown grade '" + std::string(name) + "'");
}

std::string grade_name(Grade grade) {
  switch (grade) {
    case Grade::kPerfect: return "Perfect";
    case Grade::kExcellent: return "Excellent";
    case Grade::kGood: return "Good";
    case Grade::kFair: return "Fair";
    case Grade::kBad: return "Bad";
  }
  throw std::invalid_argument("invalid grade value");
}

std::string mode_name(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::kClickOnly: return "click_only";
    case EnsembleMode::kPointwiseSimple: return "pointwise_simple";
    case EnsembleMode::kPointwiseEnsemble: return "pointwise_ensemble";
    case EnsembleMode::kPairwiseEnsemble: return "pairwise_ensemble";
  }
  throw std::invalid_argument("invalid ensemble mode");
}

EnsembleMode parse_mode(std::string_view name) {
  if (name == "click_only") return EnsembleMode::kClickOnly;
  if (name == "pointwise_simple") return EnsembleMode::kPointwiseSimple;
  if (name == "pointwise_ensemble") return EnsembleMode::kPointwiseEnsemble;
  if (name == "pairwise_ensemble") return EnsembleMode::kPairwiseEnsemble;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

namespace {

bool uses_click(EnsembleMode mode) { return mode != EnsembleMode::kPointwiseSimple; }
bool uses_head(EnsembleMode mode) { return mode != EnsembleMode::kClickOnly; }

// Combines per-row outputs of the two towers according to the mode.
std::vector<float> combine(const Tensor<float>& features, const ModelBundle& bundle) {
  std::vector<float> scores(features.rows(), 0.0f);
  if (uses_click(bundle.mode)) {
    const Tensor<float> click = batched_tower_forward(features, bundle.click);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += click[i];
  }
  if (uses_head(bundle.mode)) {
    const Tensor<float> head = batched_feed_forward(features, bundle.finetune);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += head[i];
  }
  return scores;
}

Tensor<float> features_for(std::span<const TokenSeq* const> queries,
                           std::span<const TokenSeq* const> titles,
                           const Tensor<float>& table) {
  const std::size_t dim = table.cols();
  Tensor<float> features = Tensor<float>::matrix(queries.size(), 2 * dim);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Tensor<float> row = pair_features(*queries[i], *titles[i], table);
    std::copy(row.data().begin(), row.data().end(), features.row(i).begin());
  }
  return features;
}

}  // namespace

float ensemble_score(const TokenSeq& query, const TokenSeq& title,
                     const ModelBundle& bundle) {
  return combine(pair_features(query, title, bundle.click.embedding), bundle).front();
}

float ensemble_score(std::string_view query, std::string_view title,
                     const ModelBundle& bundle) {
  return ensemble_score(encode(query, bundle.vocab), encode(title, bundle.vocab), bundle);
}

std::vector<float> ensemble_scores(std::span<const std::string> queries,
                                   std::span<const std::string> titles,
                                   const ModelBundle& bundle) {
  if (queries.size() != titles.size()) {
    throw std::invalid_argument("ensemble_scores: size mismatch");
  }
  std::vector<float> scores;
  scores.reserve(queries.size());
  constexpr std::size_t kChunk = 2048;
  for (std::size_t begin = 0; begin < queries.size(); begin += kChunk) {
    const std::size_t end = std::min(queries.size(), begin + kChunk);
    std::vector<TokenSeq> q, t;
    for (std::size_t i = begin; i < end; ++i) {
      q.push_back(encode(queries[i], bundle.vocab));
      t.push_back(encode(titles[i], bundle.vocab));
    }
    std::vector<const TokenSeq*> qp, tp;
    for (std::size_t i = 0; i < q.size(); ++i) {
      qp.push_back(&q[i]);
      tp.push_back(&t[i]);
    }
    const auto chunk = combine(features_for(qp, tp, bundle.click.embedding), bundle);
    scores.insert(scores.end(), chunk.begin(), chunk.end());
  }
  return scores;
}

std::vector<std::pair<std::size_t, std::size_t>> discordant_pairs(
    std::span<const RatingExample> examples) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> by_query;
  std::vector<std::string_view> query_order;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto [it, inserted] = by_query.try_emplace(examples[i].query);
    if (inserted) query_order.push_back(examples[i].query);
    it->second.push_back(i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto query : query_order) {
    const auto& members = by_query[query];
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const auto a = members[x], b = members[y];
        if (examples[a].grade == examples[b].grade) continue;
        pairs.emplace_back(examples[a].grade > examples[b].grade ? std::pair{a, b}
                                                                 : std::pair{b, a});
      }
    }
  }
  return pairs;
}

ModelBundle finetune(std::span<const RatingExample> train, const Vocab& vocab,
                     const TowerParams<float>& click, const FinetuneConfig& config) {
  if (train.empty()) throw std::invalid_argument("finetune: empty training set");
  if (config.batch_size < 1) throw std::invalid_argument("finetune: batch_size must be >= 1");
  if (click.vocab_size() != vocab.size()) {
    throw std::invalid_argument("finetune: vocab does not match click embeddings");
  }
  ModelBundle bundle{vocab, click, {}, config.mode};
  if (!uses_head(config.mode)) return bundle;

  const std::vector<std::size_t> layers =
      config.layers.empty() ? click.config.layers : config.layers;
  std::mt19937_64 rng(config.seed);
  bundle.finetune = init_feed_forward<float>(2 * click.embed_dim(), layers, rng);
  if (bundle.finetune.layers.back().weight.cols() != 1) {
    throw std::invalid_argument("finetune: last layer must have width 1");
  }

  // Embeddings and the click tower are frozen, so features and click logits
  // are computed once.
  std::vector<TokenSeq> queries, titles;
  for (const auto& ex : train) {
    queries.push_back(encode(ex.query, vocab));
    titles.push_back(encode(ex.title, vocab));
  }
  std::vector<const TokenSeq*> qp, tp;
  for (std::size_t i = 0; i < train.size(); ++i) {
    qp.push_back(&queries[i]);
    tp.push_back(&titles[i]);
  }
  const Tensor<float> features = features_for(qp, tp, click.embedding);
  std::vector<float> click_logits(train.size(), 0.0f);
  if (uses_click(config.mode)) {
    const Tensor<float> out = batched_tower_forward(features, click);
    std::copy(out.data().begin(), out.data().end(), click_logits.begin());
  }
  const std::size_t width = features.cols();

  const bool pairwise = config.mode == EnsembleMode::kPairwiseEnsemble;
  const auto pairs = pairwise ? discordant_pairs(train)
                              : std::vector<std::pair<std::size_t, std::size_t>>{};
  if (pairwise && pairs.empty()) {
    throw std::invalid_argument("finetune: no grade-discordant pairs for pairwise mode");
  }
  const std::size_t units = pairwise ? pairs.size() : train.size();
  const std::size_t n = std::min(config.batch_size, units);

  std::vector<Tensor<float>*> tensors;
  for (auto& layer : bundle.finetune.layers) {
    tensors.push_back(&layer.weight);
    tensors.push_back(&layer.bias);
  }
  Optimizer<float> optimizer(config.optimizer);
  std::vector<std::size_t> order(units);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  const auto gather = [&](std::span<const std::size_t> rows) {
    Tensor<float> x = Tensor<float>::matrix(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy(features.row(rows[r]).begin(), features.row(rows[r]).end(),
                x.row(r).begin());
    }
    return x;
  };

  for (std::size_t step = 0; step < config.steps; ++step) {
    if (cursor + n > order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::span<const std::size_t> picked(order.data() + cursor, n);
    cursor += n;

    Tape<float> tape;
    const FeedForwardVars head = bind_feed_forward(tape, bundle.finetune);
    Var loss;
    if (!pairwise) {
      std::vector<std::size_t> rows(picked.begin(), picked.end());
      Tensor<float> offset({n, 1});
      std::vector<float> labels;
      for (std::size_t i = 0; i < n; ++i) {
        offset[i] = click_logits[rows[i]];
        labels.push_back(static_cast<float>(binarize_rating(train[rows[i]].grade)));
      }
      Var out = feed_forward(tape, head, tape.constant(gather(rows)));
      if (uses_click(config.mode)) out = tape.add(out, tape.constant(std::move(offset)));
      loss = tape.logloss_sum(out, std::move(labels));
    } else {
      std::vector<std::size_t> rows;
      Tensor<float> offset({n, 1});
      for (std::size_t i = 0; i < n; ++i) rows.push_back(pairs[picked[i]].first);
      for (std::size_t i = 0; i < n; ++i) rows.push_back(pairs[picked[i]].second);
      for (std::size_t i = 0; i < n; ++i) {
        offset[i] = click_logits[rows[i]] - click_logits[rows[n + i]];
      }
      const Var out = feed_forward(tape, head, tape.constant(gather(rows)));
      const Var diff = tape.add(tape.sub(tape.slice_rows(out, 0, n), tape.slice_rows(out, n, n)),
                                tape.constant(std::move(offset)));
      loss = tape.logloss_sum(diff, std::vector<float>(n, 1.0f));
    }
    tape.backward(loss);
    std::vector<const Tensor<float>*> grads;
    for (std::size_t l = 0; l < head.weights.size(); ++l) {
      grads.push_back(&tape.grad(head.weights[l]));
      grads.push_back(&tape.grad(head.biases[l]));
    }
    optimizer.step(tensors, grads);
  }
  for (const auto& layer : bundle.finetune.layers) {
    if (!layer.weight.all_finite() || !layer.bias.all_finite()) {
      throw std::domain_error("finetune diverged: non-finite parameters");
    }
  }
  return bundle;
}

metrics::MetricsReport evaluate_bundle(std::span<const RatingExample> examples,
                                       const ModelBundle& bundle) {
  std::vector<std::string> queries, titles;
  std::vector<int> grades;
  for (const auto& ex : examples) {
    queries.push_back(ex.query);
    titles.push_back(ex.title);
    grades.push_back(static_cast<int>(ex.grade));
  }
  const auto scores = ensemble_scores(queries, titles, bundle);
  const std::vector<double> wide(scores.begin(), scores.end());
  return metrics::evaluate_graded(queries, grades, wide);
}

}  // namespace relnn
