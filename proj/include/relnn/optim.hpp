// First-order optimizers over parameter tensors.

#ifndef RELNN_OPTIM_HPP_
#define RELNN_OPTIM_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relnn/tensor.hpp"

namespace relnn {

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

std::string optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

// Adam with bias-corrected moments. Plain SGD when config.kind is kSgd, in
// which case no moments are kept.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  void step(std::span<Tensor<T>* const> params,
            std::span<const Tensor<T>* const> grads) {
    if (params.size() != grads.size()) {
      throw std::invalid_argument("optimizer: params/grads count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i]->shape() != grads[i]->shape()) {
        throw std::invalid_argument("optimizer: gradient shape " +
                                    shape_string(grads[i]->shape()) +
                                    " does not match parameter " +
                                    shape_string(params[i]->shape()));
      }
    }
    ++step_;
    if (config_.kind == OptimizerKind::kSgd) {
      const T lr = static_cast<T>(config_.lr);
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->data();
        const auto g = grads[i]->data();
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
      }
      return;
    }
    if (first_.empty()) {
      for (const auto* p : params) {
        first_.emplace_back(p->shape());
        second_.emplace_back(p->shape());
      }
    }
    if (first_.size() != params.size()) {
      throw std::invalid_argument("optimizer: parameter set changed between steps");
    }
    const double t = static_cast<double>(step_);
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(config_.beta1, t)));
    const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(config_.beta2, t)));
    const T lr = static_cast<T>(config_.lr);
    const T eps = static_cast<T>(config_.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (first_[i].shape() != params[i]->shape()) {
        throw std::invalid_argument("optimizer: moment shape mismatch");
      }
      auto p = params[i]->data();
      const auto g = grads[i]->data();
      auto m = first_[i].data();
      auto v = second_[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = b1 * m[j] + (T{1} - b1) * g[j];
        v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
        p[j] -= lr * (m[j] * c1) / (std::sqrt(v[j] * c2) + eps);
      }
    }
  }

  std::uint64_t steps() const { return step_; }
  const OptimizerConfig& config() const { return config_; }
  const std::vector<Tensor<T>>& first_moments() const { return first_; }
  const std::vector<Tensor<T>>& second_moments() const { return second_; }

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor<T>> first_;
  std::vector<Tensor<T>> second_;
};

}  // namespace relnn

#endif  // RELNN_OPTIM_HPP_
