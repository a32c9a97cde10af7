// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/optim.hpp"

#include <cmath>
#include <numbers>

namespace litchi::harness {

template <typename T>
Sgd<T>::Sgd(std::vector<nn::Var<T>> params, double momentum, double weight_decay, bool nesterov)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay), nesterov_(nesterov) {
  for (const auto& p : params_) {
    velocity_.emplace_back(p.value().shape());
    if (p.value().rank() >= 2) ++decayed_;
  }
}

template <typename T>
void Sgd<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
double Sgd<T>::clip_grad_norm(double max_norm) {
  double sq = 0;
  for (const auto& p : params_) {
    const auto& g = p.grad();
    for (int64_t k = 0; k < g.numel(); ++k) sq += static_cast<double>(g.data()[k]) * static_cast<double>(g.data()[k]);
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto& p : params_) {
      auto& g = p.mutable_grad();
      for (int64_t k = 0; k < g.numel(); ++k) g.data()[k] *= scale;
    }
  }
  return norm;
}

template <typename T>
void Sgd<T>::step(double lr) {
  const T mu = static_cast<T>(momentum_), l = static_cast<T>(lr);
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const auto& g = p.grad();
    if (g.numel() != p.value().numel()) continue;
    const T wd = p.value().rank() >= 2 ? static_cast<T>(weight_decay_) : T(0);
    T* w = p.mutable_value().data();
    T* v = velocity_[i].data();
    const T* gd = g.data();
    for (int64_t k = 0; k < g.numel(); ++k) {
      const T d = gd[k] + wd * w[k];
      v[k] = mu * v[k] + d;
      w[k] -= l * (nesterov_ ? d + mu * v[k] : v[k]);
    }
  }
}

double LrSchedule::at(int64_t step) const {
  if (step < warmup_steps) return base * static_cast<double>(step + 1) / static_cast<double>(warmup_steps + 1);
  if (!cosine) return base;
  const double span = static_cast<double>(std::max<int64_t>(1, total_steps - warmup_steps));
  const double t = std::min(1.0, static_cast<double>(step - warmup_steps) / span);
  const double lo = base * final_fraction;
  return lo + 0.5 * (base - lo) * (1.0 + std::cos(std::numbers::pi * t));
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace litchi::harness
