// Scalar loss functions on logits.

#ifndef RELNN_LOSSES_HPP_
#define RELNN_LOSSES_HPP_

#include <algorithm>
#include <cmath>

namespace relnn {

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

// -l log(sigmoid(x)) - (1 - l) log(sigmoid(-x)) in softplus form.
template <typename T>
T logloss(T x, T label) {
  return std::max(x, T{0}) - label * x + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
T logloss_grad(T x, T label) {
  return sigmoid(x) - label;
}

// Penalizes batch-negative logits above -margin.
template <typename T>
T hinge_neg(T x, T margin) {
  return std::max(T{0}, margin + x);
}

// Subgradient; 0 at the kink.
template <typename T>
T hinge_neg_grad(T x, T margin) {
  return margin + x > T{0} ? T{1} : T{0};
}

}  // namespace relnn

#endif  // RELNN_LOSSES_HPP_
