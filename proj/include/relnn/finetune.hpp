// Stage-2 fine-tuning on human relevance grades and the serving bundle.

#ifndef RELNN_FINETUNE_HPP_
#define RELNN_FINETUNE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relnn/metrics.hpp"
#include "relnn/optim.hpp"
#include "relnn/text.hpp"
#include "relnn/tower.hpp"

namespace relnn {

// Numeric value doubles as the NDCG grade.
enum class Grade { kBad = 0, kFair = 1, kGood = 2, kExcellent = 3, kPerfect = 4 };

// Exact words "Perfect", "Excellent", "Good", "Fair", "Bad"; anything else
// throws std::invalid_argument.
Grade parse_grade(std::string_view name);
std::string grade_name(Grade grade);

// Perfect/Excellent/Good -> 1, Fair/Bad -> 0.
inline int binarize_rating(Grade grade) { return grade >= Grade::kGood ? 1 : 0; }

struct RatingExample {
  std::string query;
  std::string title;
  Grade grade = Grade::kBad;

  bool operator==(const RatingExample&) const = default;
};

enum class EnsembleMode {
  kClickOnly,          // H_click
  kPointwiseSimple,    // H_ft on the click embeddings
  kPointwiseEnsemble,  // H_click + H_ft
  kPairwiseEnsemble,   // H_click + H_ft, trained on grade-discordant pairs
};

std::string mode_name(EnsembleMode mode);
EnsembleMode parse_mode(std::string_view name);

// Serving unit. The fine-tune head reads the click tower's embedding table
// and is empty in click_only mode.
struct ModelBundle {
  Vocab vocab;
  TowerParams<float> click;
  FeedForward<float> finetune;
  EnsembleMode mode = EnsembleMode::kClickOnly;
};

float ensemble_score(const TokenSeq& query, const TokenSeq& title,
                     const ModelBundle& bundle);
float ensemble_score(std::string_view query, std::string_view title,
                     const ModelBundle& bundle);

// Batched scoring; agrees with ensemble_score row by row.
std::vector<float> ensemble_scores(std::span<const std::string> queries,
                                   std::span<const std::string> titles,
                                   const ModelBundle& bundle);

struct FinetuneConfig {
  EnsembleMode mode = EnsembleMode::kPointwiseEnsemble;
  // Fine-tune head widths; empty means "same as the click tower".
  std::vector<std::size_t> layers;
  std::size_t steps = 2000;
  std::size_t batch_size = 128;
  OptimizerConfig optimizer;
  std::uint64_t seed = 7;
};

// Same-query pairs with strictly different grades, as (higher, lower)
// indices into `examples`.
std::vector<std::pair<std::size_t, std::size_t>> discordant_pairs(
    std::span<const RatingExample> examples);

// Trains a freshly initialized head with the click tower and embeddings
// frozen. Throws std::invalid_argument on an empty set, or in pairwise mode
// when there are no discordant pairs.
ModelBundle finetune(std::span<const RatingExample> train, const Vocab& vocab,
                     const TowerParams<float>& click, const FinetuneConfig& config);

metrics::MetricsReport evaluate_bundle(std::span<const RatingExample> examples,
                                       const ModelBundle& bundle);

}  // namespace relnn

#endif  // RELNN_FINETUNE_HPP_
