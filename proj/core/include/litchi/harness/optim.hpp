// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/nn/module.hpp"

namespace litchi::harness {

/// SGD with momentum (optionally Nesterov). Weight decay applies only to
/// parameters of rank >= 2, leaving biases and norm scales undecayed.
template <typename T>
class Sgd {
 public:
  Sgd(std::vector<nn::Var<T>> params, double momentum, double weight_decay, bool nesterov);

  void zero_grad();
  /// Rescales all gradients so their joint L2 norm is at most max_norm;
  /// returns the norm before scaling.
  double clip_grad_norm(double max_norm);
  void step(double lr);
  size_t num_decayed() const noexcept { return decayed_; }

 private:
  std::vector<nn::Var<T>> params_;
  std::vector<nn::Tensor<T>> velocity_;
  double momentum_, weight_decay_;
  bool nesterov_;
  size_t decayed_ = 0;
};

/// Linear warmup from zero then cosine decay to base * final_fraction,
/// indexed by optimizer step.
struct LrSchedule {
  double base = 0.01;
  int64_t warmup_steps = 0;
  int64_t total_steps = 1;
  bool cosine = true;
  double final_fraction = 0.01;

  double at(int64_t step) const;
};

extern template class Sgd<float>;
extern template class Sgd<double>;

}  // namespace litchi::harness
