#include "relnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "relnn/kernels.hpp"
#include "relnn/losses.hpp"

namespace relnn {

namespace k = kernels::parallel;

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": " + detail);
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* op, const char* name) {
  require(t.rank() == 2, op, std::string(name) + " must be a matrix, got " +
                                 shape_string(t.shape()));
}

}  // namespace

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (v.index >= nodes_.size()) throw std::out_of_range("tape: invalid var");
  return nodes_[v.index];
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.index >= nodes_.size()) throw std::out_of_range("tape: invalid var");
  return nodes_[v.index];
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.numel() == 0 && value(v).numel() != 0) {
    n.grad = Tensor<T>(value(v).shape());
  }
  return n.grad;
}

template <typename T>
const Tensor<T>& Tape<T>::grad(Var v) {
  return grad_buffer(v);
}

template <typename T>
Var Tape<T>::push(Tensor<T> value, bool requires_grad,
                  std::function<void()> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  return push(std::move(value), false, {});
}

template <typename T>
Var Tape<T>::parameter(const Tensor<T>& param) {
  Node n;
  n.external = &param;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::embed_bag(Var table, std::span<const TokenSeq> seqs) {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets{0};
  offsets.reserve(seqs.size() + 1);
  for (const auto& seq : seqs) {
    ids.insert(ids.end(), seq.ids.begin(), seq.ids.end());
    offsets.push_back(ids.size());
  }
  return embed_bag_impl(table, std::move(ids), std::move(offsets));
}

template <typename T>
Var Tape<T>::embed_bag(Var table, std::span<const TokenSeq* const> seqs) {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets{0};
  offsets.reserve(seqs.size() + 1);
  for (const TokenSeq* seq : seqs) {
    ids.insert(ids.end(), seq->ids.begin(), seq->ids.end());
    offsets.push_back(ids.size());
  }
  return embed_bag_impl(table, std::move(ids), std::move(offsets));
}

template <typename T>
Var Tape<T>::embed_bag_impl(Var table, std::vector<std::uint32_t> ids,
                            std::vector<std::size_t> offsets) {
  const Tensor<T>& tv = value(table);
  require_matrix(tv, "embed_bag", "table");
  const std::size_t vocab = tv.rows();
  const std::size_t dim = tv.cols();
  for (const auto id : ids) {
    if (id >= vocab) {
      throw std::out_of_range("embed_bag: id " + std::to_string(id) +
                              " out of range for table with " +
                              std::to_string(vocab) + " rows");
    }
  }
  const std::size_t bags = offsets.size() - 1;
  Tensor<T> out = Tensor<T>::matrix(bags, dim);
  k::embed_bag<T>({ids, offsets}, tv.data().data(), dim, out.data().data());
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(table),
              [this, table, self, dim, vocab, ids = std::move(ids),
               offsets = std::move(offsets)] {
                k::embed_bag_backward<T>({ids, offsets}, node(self).grad.data().data(),
                                         dim, vocab, grad_buffer(table).data().data());
              });
}

template <typename T>
Var Tape<T>::affine(Var x, Var w, Var b) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& wv = value(w);
  require_matrix(xv, "affine", "x");
  require_matrix(wv, "affine", "W");
  require(xv.cols() == wv.rows(), "affine",
          "x " + shape_string(xv.shape()) + " does not conform to W " +
              shape_string(wv.shape()));
  const std::size_t n = xv.rows(), p = xv.cols(), q = wv.cols();
  Tensor<T> out = Tensor<T>::matrix(n, q);
  k::gemm<T>(n, p, q, xv.data().data(), wv.data().data(), out.data().data(), false);
  if (b.valid()) {
    const Tensor<T>& bv = value(b);
    require(bv.numel() == q, "affine",
            "bias " + shape_string(bv.shape()) + " does not match width " +
                std::to_string(q));
    for (std::size_t r = 0; r < n; ++r) {
      T* row = out.data().data() + r * q;
      for (std::size_t j = 0; j < q; ++j) row[j] += bv[j];
    }
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(x) || needs(w) || needs(b),
              [this, x, w, b, self, n, p, q] {
                const T* dy = node(self).grad.data().data();
                if (needs(x)) {
                  k::gemm_a_bt<T>(n, q, p, dy, value(w).data().data(),
                                  grad_buffer(x).data().data(), true);
                }
                if (needs(w)) {
                  k::gemm_at_b<T>(n, p, q, value(x).data().data(), dy,
                                  grad_buffer(w).data().data(), true);
                }
                if (needs(b)) k::column_sum<T>(n, q, dy, grad_buffer(b).data().data());
              });
}

template <typename T>
Var Tape<T>::relu(Var x) {
  const Tensor<T>& xv = value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] > T{0} ? xv[i] : T{0};
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(x), [this, x, self] {
    const Tensor<T>& dy = node(self).grad;
    const Tensor<T>& xv = value(x);
    Tensor<T>& dx = grad_buffer(x);
    for (std::size_t i = 0; i < dy.numel(); ++i) dx[i] += xv[i] > T{0} ? dy[i] : T{0};
  });
}

template <typename T>
Var Tape<T>::concat_cols(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_matrix(av, "concat_cols", "a");
  require_matrix(bv, "concat_cols", "b");
  require(av.rows() == bv.rows(), "concat_cols", "row counts differ");
  const std::size_t n = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor<T> out = Tensor<T>::matrix(n, ca + cb);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(av.row(r).data(), ca, out.row(r).data());
    std::copy_n(bv.row(r).data(), cb, out.row(r).data() + ca);
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(a) || needs(b), [this, a, b, self, n, ca, cb] {
    const Tensor<T>& dy = node(self).grad;
    for (std::size_t r = 0; r < n; ++r) {
      if (needs(a)) {
        auto dst = grad_buffer(a).row(r);
        for (std::size_t j = 0; j < ca; ++j) dst[j] += dy.row(r)[j];
      }
      if (needs(b)) {
        auto dst = grad_buffer(b).row(r);
        for (std::size_t j = 0; j < cb; ++j) dst[j] += dy.row(r)[ca + j];
      }
    }
  });
}

template <typename T>
Var Tape<T>::concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t width = value(parts.front()).cols();
  std::size_t rows = 0;
  bool any_grad = false;
  for (const Var v : parts) {
    require_matrix(value(v), "concat_rows", "part");
    require(value(v).cols() == width, "concat_rows", "widths differ");
    rows += value(v).rows();
    any_grad = any_grad || needs(v);
  }
  Tensor<T> out = Tensor<T>::matrix(rows, width);
  std::size_t at = 0;
  for (const Var v : parts) {
    const auto src = value(v).data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(at));
    at += src.size();
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(out), any_grad, [this, inputs = std::move(inputs), self] {
    const Tensor<T>& dy = node(self).grad;
    std::size_t at = 0;
    for (const Var v : inputs) {
      const std::size_t count = value(v).numel();
      if (needs(v)) {
        Tensor<T>& dx = grad_buffer(v);
        for (std::size_t i = 0; i < count; ++i) dx[i] += dy[at + i];
      }
      at += count;
    }
  });
}

template <typename T>
Var Tape<T>::slice_rows(Var x, std::size_t begin, std::size_t count) {
  const Tensor<T>& xv = value(x);
  require_matrix(xv, "slice_rows", "x");
  require(begin + count <= xv.rows(), "slice_rows", "range past end");
  const std::size_t width = xv.cols();
  Tensor<T> out = Tensor<T>::matrix(count, width);
  std::copy_n(xv.data().data() + begin * width, count * width, out.data().data());
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(x), [this, x, self, begin, count, width] {
    const Tensor<T>& dy = node(self).grad;
    T* dx = grad_buffer(x).data().data() + begin * width;
    for (std::size_t i = 0; i < count * width; ++i) dx[i] += dy[i];
  });
}

template <typename T>
Var Tape<T>::cyclic_shift_rows(Var x, std::size_t shift) {
  const Tensor<T>& xv = value(x);
  require_matrix(xv, "cyclic_shift_rows", "x");
  const std::size_t n = xv.rows();
  require(n >= 1, "cyclic_shift_rows", "empty input");
  const std::size_t width = xv.cols();
  shift %= n;
  Tensor<T> out = Tensor<T>::matrix(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = (i + n - shift) % n;
    std::copy_n(xv.row(src).data(), width, out.row(i).data());
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(x), [this, x, self, n, width, shift] {
    const Tensor<T>& dy = node(self).grad;
    Tensor<T>& dx = grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = (i + n - shift) % n;
      for (std::size_t j = 0; j < width; ++j) dx.row(src)[j] += dy.row(i)[j];
    }
  });
}

template <typename T>
Var Tape<T>::gather_add(Var a, std::vector<std::uint32_t> ia, Var b,
                        std::vector<std::uint32_t> ib, Var bias) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_matrix(av, "gather_add", "a");
  require_matrix(bv, "gather_add", "b");
  require(av.cols() == bv.cols(), "gather_add", "widths differ");
  require(ia.size() == ib.size(), "gather_add", "index lists differ in length");
  const std::size_t width = av.cols();
  for (const auto i : ia) require(i < av.rows(), "gather_add", "index into a out of range");
  for (const auto i : ib) require(i < bv.rows(), "gather_add", "index into b out of range");
  const T* bias_data = nullptr;
  if (bias.valid()) {
    require(value(bias).numel() == width, "gather_add", "bias width mismatch");
    bias_data = value(bias).data().data();
  }
  Tensor<T> out = Tensor<T>::matrix(ia.size(), width);
  k::gather_add<T>(ia, ib, av.data().data(), bv.data().data(), bias_data, width,
                   out.data().data());
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  const std::size_t rows = ia.size();
  return push(std::move(out), needs(a) || needs(b) || needs(bias),
              [this, a, b, bias, self, width, rows, ia = std::move(ia),
               ib = std::move(ib)] {
                const T* dy = node(self).grad.data().data();
                if (needs(a)) {
                  k::scatter_add<T>(ia, dy, width, value(a).rows(),
                                    grad_buffer(a).data().data());
                }
                if (needs(b)) {
                  k::scatter_add<T>(ib, dy, width, value(b).rows(),
                                    grad_buffer(b).data().data());
                }
                if (needs(bias)) {
                  k::column_sum<T>(rows, width, dy, grad_buffer(bias).data().data());
                }
              });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require(av.shape() == bv.shape(), "add",
          shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] + bv[i];
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(a) || needs(b), [this, a, b, self] {
    const Tensor<T>& dy = node(self).grad;
    if (needs(a)) {
      Tensor<T>& da = grad_buffer(a);
      for (std::size_t i = 0; i < dy.numel(); ++i) da[i] += dy[i];
    }
    if (needs(b)) {
      Tensor<T>& db = grad_buffer(b);
      for (std::size_t i = 0; i < dy.numel(); ++i) db[i] += dy[i];
    }
  });
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require(av.shape() == bv.shape(), "sub",
          shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] - bv[i];
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(a) || needs(b), [this, a, b, self] {
    const Tensor<T>& dy = node(self).grad;
    if (needs(a)) {
      Tensor<T>& da = grad_buffer(a);
      for (std::size_t i = 0; i < dy.numel(); ++i) da[i] += dy[i];
    }
    if (needs(b)) {
      Tensor<T>& db = grad_buffer(b);
      for (std::size_t i = 0; i < dy.numel(); ++i) db[i] -= dy[i];
    }
  });
}

template <typename T>
Var Tape<T>::scale(Var x, T factor) {
  const Tensor<T>& xv = value(x);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = xv[i] * factor;
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(x), [this, x, self, factor] {
    const Tensor<T>& dy = node(self).grad;
    Tensor<T>& dx = grad_buffer(x);
    for (std::size_t i = 0; i < dy.numel(); ++i) dx[i] += dy[i] * factor;
  });
}

template <typename T>
Var Tape<T>::logloss_sum(Var logits, std::vector<T> labels) {
  const Tensor<T>& xv = value(logits);
  require(xv.numel() == labels.size(), "logloss_sum", "label count mismatch");
  T total{0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= T{0} && labels[i] <= T{1}, "logloss_sum",
            "label outside [0, 1]");
    total += logloss(xv[i], labels[i]);
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(Tensor<T>(Shape{}, total), needs(logits),
              [this, logits, self, labels = std::move(labels)] {
                const T dy = node(self).grad[0];
                const Tensor<T>& xv = value(logits);
                Tensor<T>& dx = grad_buffer(logits);
                for (std::size_t i = 0; i < labels.size(); ++i) {
                  dx[i] += dy * logloss_grad(xv[i], labels[i]);
                }
              });
}

template <typename T>
Var Tape<T>::hinge_neg_sum(Var logits, T margin) {
  require(margin > T{0}, "hinge_neg_sum", "margin must be positive");
  const Tensor<T>& xv = value(logits);
  T total{0};
  for (std::size_t i = 0; i < xv.numel(); ++i) total += hinge_neg(xv[i], margin);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(Tensor<T>(Shape{}, total), needs(logits), [this, logits, self, margin] {
    const T dy = node(self).grad[0];
    const Tensor<T>& xv = value(logits);
    Tensor<T>& dx = grad_buffer(logits);
    for (std::size_t i = 0; i < xv.numel(); ++i) dx[i] += dy * hinge_neg_grad(xv[i], margin);
  });
}

template <typename T>
void Tape<T>::backward(Var root) {
  const Tensor<T>& rv = value(root);
  if (rv.numel() != 1) {
    throw std::invalid_argument("backward: root must be a scalar, got shape " +
                                shape_string(rv.shape()));
  }
  if (!std::isfinite(rv[0])) throw std::domain_error("backward: non-finite loss");
  grad_buffer(root)[0] += T{1};
  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backprop && n.grad.numel() != 0) n.backprop();
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace relnn
