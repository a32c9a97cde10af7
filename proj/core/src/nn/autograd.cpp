// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/autograd.hpp"

#include <unordered_set>

#include "litchi/error.hpp"

namespace litchi::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool GradMode::enabled() noexcept { return g_grad_enabled; }
void GradMode::set_enabled(bool on) noexcept { g_grad_enabled = on; }

template <typename T>
void Node<T>::accumulate(const Tensor<T>& g) {
  if (!grad.defined()) {
    grad = g;
  } else {
    grad += g;
  }
}

template <typename T>
void Node<T>::accumulate(Tensor<T>&& g) {
  if (!grad.defined()) {
    grad = std::move(g);
  } else {
    grad += g;
  }
}

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
Var<T> Var<T>::make(Tensor<T> value, std::vector<Var> inputs, BackwardFn<T> fn) {
  Var out(std::move(value), false);
  if (!GradMode::enabled()) return out;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->inputs.reserve(inputs.size());
  for (auto& in : inputs) out.node_->inputs.push_back(in.node_);
  out.node_->backward = std::move(fn);
  return out;
}

template <typename T>
void Var<T>::backward() {
  if (node_->value.numel() != 1) {
    throw ShapeError("backward() without a seed requires a scalar, got " + shape_str(shape()));
  }
  backward(Tensor<T>(node_->value.shape(), T(1)));
}

template <typename T>
void Var<T>::backward(const Tensor<T>& seed) {
  if (!node_->requires_grad) return;
  // Iterative post-order DFS gives a topological order without recursion.
  // Shared ownership keeps children alive after their parents release inputs.
  std::vector<NodePtr<T>> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<NodePtr<T>, size_t>> stack;
  stack.emplace_back(node_, 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      const NodePtr<T>& child = n->inputs[next++];
      if (child && child->requires_grad && child->backward && seen.insert(child.get()).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(std::move(n));
      stack.pop_back();
    }
  }
  node_->accumulate(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = it->get();
    if (n->backward && n->grad.defined()) n->backward(n->grad, n->inputs);
    // Release the graph as we go; intermediate grads are not retained.
    n->backward = nullptr;
    n->inputs.clear();
    if (n != node_.get()) {
      n->grad = Tensor<T>();
      it->reset();
    }
  }
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_) node_->grad = Tensor<T>();
}

template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;

}  // namespace litchi::nn
