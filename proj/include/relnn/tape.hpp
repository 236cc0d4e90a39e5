// Reverse-mode gradient tape over dense tensors.
//
// Nodes are appended in evaluation order; backward() walks them in exact
// reverse order. Parameters are referenced, not copied, so the referenced
// tensors must outlive the tape and must not change while it is alive.

#ifndef RELNN_TAPE_HPP_
#define RELNN_TAPE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "relnn/tensor.hpp"
#include "relnn/text.hpp"

namespace relnn {

struct Var {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor<T> value);
  Var parameter(const Tensor<T>& param);

  // [m, d]: per sequence, the sum of table rows divided by sqrt(token count).
  // Empty sequences give zero rows. Throws std::out_of_range on a bad id.
  Var embed_bag(Var table, std::span<const TokenSeq> seqs);
  Var embed_bag(Var table, std::span<const TokenSeq* const> seqs);

  // x[n,p] W[p,q] + b[q]; `b` may be an invalid Var for no bias.
  Var affine(Var x, Var w, Var b);
  Var matmul(Var x, Var w) { return affine(x, w, Var{}); }
  Var relu(Var x);

  Var concat_cols(Var a, Var b);
  Var concat_rows(std::span<const Var> parts);
  Var slice_rows(Var x, std::size_t begin, std::size_t count);
  // Row i of the result is row (i - shift) mod n of x.
  Var cyclic_shift_rows(Var x, std::size_t shift);
  // Row r of the result is a[ia[r]] + b[ib[r]] + bias.
  Var gather_add(Var a, std::vector<std::uint32_t> ia, Var b,
                 std::vector<std::uint32_t> ib, Var bias);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var x, T factor);

  // Scalar sum of logloss(x_i, labels_i).
  Var logloss_sum(Var logits, std::vector<T> labels);
  // Scalar sum of hinge_neg(x_i, margin).
  Var hinge_neg_sum(Var logits, T margin);

  // Exact reverse pass from a scalar root. Throws std::invalid_argument when
  // the root holds more than one element.
  void backward(Var root);

  const Tensor<T>& value(Var v) const;
  // Gradient after backward(); zeros when the node was never reached.
  const Tensor<T>& grad(Var v);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    std::function<void()> backprop;
  };

  Var push(Tensor<T> value, bool requires_grad, std::function<void()> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  bool needs(Var v) const { return v.valid() && node(v).requires_grad; }
  Tensor<T>& grad_buffer(Var v);
  Var embed_bag_impl(Var table, std::vector<std::uint32_t> ids,
                     std::vector<std::size_t> offsets);

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace relnn

#endif  // RELNN_TAPE_HPP_
