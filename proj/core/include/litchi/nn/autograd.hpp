// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "litchi/nn/tensor.hpp"

namespace litchi::nn {

/// Thread-local switch for graph recording. Inference paths run under a
/// NoGradGuard so forward passes allocate no backward closures.
class GradMode {
 public:
  static bool enabled() noexcept;
  static void set_enabled(bool on) noexcept;
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Node;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

/// Receives the upstream gradient and the op's inputs; accumulates into the
/// inputs that require grad.
template <typename T>
using BackwardFn = std::function<void(const Tensor<T>& grad_out, const std::vector<NodePtr<T>>& inputs)>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<NodePtr<T>> inputs;
  BackwardFn<T> backward;

  /// grad += g, allocating on first use.
  void accumulate(const Tensor<T>& g);
  void accumulate(Tensor<T>&& g);
};

/// Handle to a value in the dynamic graph. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  /// Direct mutation of a leaf (parameter updates, test perturbations).
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() { return node_->grad; }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  int64_t dim(int axis) const { return node_->value.dim(axis); }

  /// Reverse-mode sweep from this value. A scalar root is seeded with 1.
  void backward();
  void backward(const Tensor<T>& seed);
  void zero_grad();
  Var detach() const { return Var(node_->value, false); }

  const NodePtr<T>& node() const noexcept { return node_; }

  /// Builds the output of an op: records `fn` only when grad mode is on and
  /// some input requires grad.
  static Var make(Tensor<T> value, std::vector<Var> inputs, BackwardFn<T> fn);

 private:
  NodePtr<T> node_;
};

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Var<float>;
extern template class Var<double>;

}  // namespace litchi::nn
