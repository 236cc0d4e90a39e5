// The single-tower scorer: embedding bags for query and title, concatenated
// and passed through a feed-forward net with ReLU hidden layers and a linear
// width-1 output.

#ifndef RELNN_TOWER_HPP_
#define RELNN_TOWER_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "relnn/tape.hpp"
#include "relnn/tensor.hpp"
#include "relnn/text.hpp"

namespace relnn {

struct TowerConfig {
  std::size_t embed_dim = 64;
  // Hidden widths followed by the output width, which must be 1.
  std::vector<std::size_t> layers{128, 64, 1};
  std::uint64_t seed = 42;

  // Throws std::invalid_argument.
  void validate() const;
};

template <typename T>
struct DenseLayer {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out]

  bool operator==(const DenseLayer&) const = default;
};

template <typename T>
struct FeedForward {
  std::vector<DenseLayer<T>> layers;

  std::size_t input_width() const {
    return layers.empty() ? 0 : layers.front().weight.rows();
  }
  bool operator==(const FeedForward&) const = default;
};

template <typename T>
struct TowerParams {
  TowerConfig config;
  Tensor<T> embedding;  // [V, d]
  FeedForward<T> head;  // input width 2d

  std::size_t vocab_size() const { return embedding.rows(); }
  std::size_t embed_dim() const { return embedding.cols(); }
  bool all_finite() const;
};

// Glorot-uniform weights, zero biases.
template <typename T>
FeedForward<T> init_feed_forward(std::size_t input_width,
                                 std::span<const std::size_t> layers,
                                 std::mt19937_64& rng);

// Embeddings ~ U(-0.05, 0.05), then the feed-forward layers in order.
template <typename T>
TowerParams<T> init_tower(const TowerConfig& config, std::size_t vocab_size,
                          std::uint64_t seed);

// [d]: sum of rows / sqrt(max(token count, 1)). Throws std::out_of_range.
template <typename T>
Tensor<T> embed_bag(const TokenSeq& seq, const Tensor<T>& table);

// [m, 1] feed-forward output for each row of features [m, in].
template <typename T>
Tensor<T> batched_feed_forward(const Tensor<T>& features, const FeedForward<T>& net);

// [1, 2d] feature row concat(embed_bag(query), embed_bag(title)).
template <typename T>
Tensor<T> pair_features(const TokenSeq& query, const TokenSeq& title,
                        const Tensor<T>& table);

template <typename T>
T tower_forward(const TokenSeq& query, const TokenSeq& title,
                const TowerParams<T>& params);

// Applies the feed-forward part to stacked feature rows [m, 2d].
template <typename T>
Tensor<T> batched_tower_forward(const Tensor<T>& features, const TowerParams<T>& params);

template <typename To, typename From>
FeedForward<To> feed_forward_cast(const FeedForward<From>& net) {
  FeedForward<To> out;
  for (const auto& layer : net.layers) {
    out.layers.push_back({tensor_cast<To>(layer.weight), tensor_cast<To>(layer.bias)});
  }
  return out;
}

template <typename To, typename From>
TowerParams<To> tower_cast(const TowerParams<From>& params) {
  return {params.config, tensor_cast<To>(params.embedding),
          feed_forward_cast<To>(params.head)};
}

// Tape bindings.

struct FeedForwardVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

template <typename T>
FeedForwardVars bind_feed_forward(Tape<T>& tape, const FeedForward<T>& net);

template <typename T>
Var feed_forward(Tape<T>& tape, const FeedForwardVars& vars, Var features);

// Feed-forward output for rows concat(left[li[r]], right[ri[r]]), without
// materializing the concatenated rows: the first layer is evaluated as
// left W_top and right W_bottom and the products are gathered per row.
template <typename T>
Var feed_forward_gathered(Tape<T>& tape, const FeedForwardVars& vars, Var left,
                          std::vector<std::uint32_t> li, Var right,
                          std::vector<std::uint32_t> ri);

}  // namespace relnn

#endif  // RELNN_TOWER_HPP_
