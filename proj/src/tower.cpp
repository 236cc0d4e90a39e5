#include "relnn/tower.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relnn/kernels.hpp"

namespace relnn {

void TowerConfig::validate() const {
  if (embed_dim < 1) throw std::invalid_argument("tower: embed_dim must be >= 1");
  if (layers.empty()) throw std::invalid_argument("tower: no layers");
  for (const auto width : layers) {
    if (width < 1) throw std::invalid_argument("tower: layer widths must be >= 1");
  }
  if (layers.back() != 1) {
    throw std::invalid_argument("tower: last layer must have width 1, got " +
                                std::to_string(layers.back()));
  }
}

template <typename T>
bool TowerParams<T>::all_finite() const {
  if (!embedding.all_finite()) return false;
  for (const auto& layer : head.layers) {
    if (!layer.weight.all_finite() || !layer.bias.all_finite()) return false;
  }
  return true;
}

template <typename T>
FeedForward<T> init_feed_forward(std::size_t input_width,
                                 std::span<const std::size_t> layers,
                                 std::mt19937_64& rng) {
  FeedForward<T> net;
  std::size_t fan_in = input_width;
  for (const auto fan_out : layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer<T> layer{Tensor<T>::matrix(fan_in, fan_out), Tensor<T>({fan_out})};
    for (auto& w : layer.weight.data()) w = static_cast<T>(dist(rng));
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return net;
}

template <typename T>
TowerParams<T> init_tower(const TowerConfig& config, std::size_t vocab_size,
                          std::uint64_t seed) {
  config.validate();
  if (vocab_size < 1) throw std::invalid_argument("tower: vocab_size must be >= 1");
  std::mt19937_64 rng(seed);
  TowerParams<T> params;
  params.config = config;
  params.embedding = Tensor<T>::matrix(vocab_size, config.embed_dim);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (auto& v : params.embedding.data()) v = static_cast<T>(dist(rng));
  params.head = init_feed_forward<T>(2 * config.embed_dim, config.layers, rng);
  return params;
}

template <typename T>
Tensor<T> embed_bag(const TokenSeq& seq, const Tensor<T>& table) {
  const std::size_t dim = table.cols();
  for (const auto id : seq.ids) {
    if (id >= table.rows()) {
      throw std::out_of_range("embed_bag: id " + std::to_string(id) +
                              " out of range for table with " +
                              std::to_string(table.rows()) + " rows");
    }
  }
  Tensor<T> out({dim});
  const std::size_t offsets[] = {0, seq.ids.size()};
  kernels::parallel::embed_bag<T>({seq.ids, offsets}, table.data().data(), dim,
                                  out.data().data());
  return out;
}

template <typename T>
Tensor<T> batched_feed_forward(const Tensor<T>& features, const FeedForward<T>& net) {
  if (features.rank() != 2 || features.cols() != net.input_width()) {
    throw std::invalid_argument("feed_forward: features " +
                                shape_string(features.shape()) +
                                " do not match input width " +
                                std::to_string(net.input_width()));
  }
  Tensor<T> current = features;
  const std::size_t rows = features.rows();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::size_t p = layer.weight.rows();
    const std::size_t q = layer.weight.cols();
    Tensor<T> next = Tensor<T>::matrix(rows, q);
    kernels::parallel::gemm<T>(rows, p, q, current.data().data(),
                               layer.weight.data().data(), next.data().data(), false);
    const bool hidden = l + 1 < net.layers.size();
    for (std::size_t r = 0; r < rows; ++r) {
      T* row = next.data().data() + r * q;
      for (std::size_t j = 0; j < q; ++j) {
        row[j] += layer.bias[j];
        if (hidden && !(row[j] > T{0})) row[j] = T{0};
      }
    }
    current = std::move(next);
  }
  return current;
}

template <typename T>
Tensor<T> pair_features(const TokenSeq& query, const TokenSeq& title,
                        const Tensor<T>& table) {
  const Tensor<T> q = embed_bag(query, table);
  const Tensor<T> t = embed_bag(title, table);
  const std::size_t dim = table.cols();
  Tensor<T> out = Tensor<T>::matrix(1, 2 * dim);
  std::copy(q.data().begin(), q.data().end(), out.data().begin());
  std::copy(t.data().begin(), t.data().end(),
            out.data().begin() + static_cast<std::ptrdiff_t>(dim));
  return out;
}

template <typename T>
T tower_forward(const TokenSeq& query, const TokenSeq& title,
                const TowerParams<T>& params) {
  return batched_feed_forward(pair_features(query, title, params.embedding),
                              params.head)[0];
}

template <typename T>
Tensor<T> batched_tower_forward(const Tensor<T>& features, const TowerParams<T>& params) {
  if (features.rank() != 2 || features.cols() != 2 * params.embed_dim()) {
    throw std::invalid_argument("batched_tower_forward: expected rows of width " +
                                std::to_string(2 * params.embed_dim()) + ", got " +
                                shape_string(features.shape()));
  }
  return batched_feed_forward(features, params.head);
}

template <typename T>
FeedForwardVars bind_feed_forward(Tape<T>& tape, const FeedForward<T>& net) {
  FeedForwardVars vars;
  for (const auto& layer : net.layers) {
    vars.weights.push_back(tape.parameter(layer.weight));
    vars.biases.push_back(tape.parameter(layer.bias));
  }
  return vars;
}

namespace {

template <typename T>
Var feed_forward_from(Tape<T>& tape, const FeedForwardVars& vars, Var x,
                      std::size_t first) {
  for (std::size_t l = first; l < vars.weights.size(); ++l) {
    x = tape.affine(x, vars.weights[l], vars.biases[l]);
    if (l + 1 < vars.weights.size()) x = tape.relu(x);
  }
  return x;
}

}  // namespace

template <typename T>
Var feed_forward(Tape<T>& tape, const FeedForwardVars& vars, Var features) {
  return feed_forward_from(tape, vars, features, 0);
}

template <typename T>
Var feed_forward_gathered(Tape<T>& tape, const FeedForwardVars& vars, Var left,
                          std::vector<std::uint32_t> li, Var right,
                          std::vector<std::uint32_t> ri) {
  if (vars.weights.empty()) throw std::invalid_argument("feed_forward: no layers");
  const std::size_t left_width = tape.value(left).cols();
  const std::size_t right_width = tape.value(right).cols();
  const Var w0 = vars.weights.front();
  if (tape.value(w0).rows() != left_width + right_width) {
    throw std::invalid_argument("feed_forward_gathered: input widths " +
                                std::to_string(left_width) + "+" +
                                std::to_string(right_width) +
                                " do not match first layer " +
                                shape_string(tape.value(w0).shape()));
  }
  const Var top = tape.slice_rows(w0, 0, left_width);
  const Var bottom = tape.slice_rows(w0, left_width, right_width);
  const Var left_proj = tape.matmul(left, top);
  const Var right_proj = tape.matmul(right, bottom);
  Var x = tape.gather_add(left_proj, std::move(li), right_proj, std::move(ri),
                          vars.biases.front());
  if (vars.weights.size() > 1) x = tape.relu(x);
  return feed_forward_from(tape, vars, x, 1);
}

#define RELNN_INSTANTIATE(T)                                                   \
  template struct TowerParams<T>;                                              \
  template FeedForward<T> init_feed_forward<T>(std::size_t,                    \
                                               std::span<const std::size_t>,   \
                                               std::mt19937_64&);              \
  template TowerParams<T> init_tower<T>(const TowerConfig&, std::size_t,       \
                                        std::uint64_t);                        \
  template Tensor<T> embed_bag<T>(const TokenSeq&, const Tensor<T>&);          \
  template Tensor<T> batched_feed_forward<T>(const Tensor<T>&,                 \
                                             const FeedForward<T>&);           \
  template Tensor<T> pair_features<T>(const TokenSeq&, const TokenSeq&,        \
                                      const Tensor<T>&);                       \
  template T tower_forward<T>(const TokenSeq&, const TokenSeq&,                \
                              const TowerParams<T>&);                          \
  template Tensor<T> batched_tower_forward<T>(const Tensor<T>&,                \
                                              const TowerParams<T>&);          \
  template FeedForwardVars bind_feed_forward<T>(Tape<T>&, const FeedForward<T>&); \
  template Var feed_forward<T>(Tape<T>&, const FeedForwardVars&, Var);         \
  template Var feed_forward_gathered<T>(Tape<T>&, const FeedForwardVars&, Var, \
                                        std::vector<std::uint32_t>, Var,       \
                                        std::vector<std::uint32_t>);

RELNN_INSTANTIATE(float)
RELNN_INSTANTIATE(double)

#undef RELNN_INSTANTIATE

}  // namespace relnn
