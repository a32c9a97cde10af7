// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include "litchi/nn/layers.hpp"

namespace litchi::testing {

/// Gives every BatchNorm in `m` non-trivial affine parameters and running statistics.
template <typename T>
void randomize_batch_norms(nn::Module<T>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gamma(0.5, 1.5), shift(-0.5, 0.5), var(0.5, 2.0);
  m.for_each_module([&](const std::string&, nn::Module<T>& mod) {
    auto* bn = dynamic_cast<nn::BatchNorm2d<T>*>(&mod);
    if (!bn) return;
    for (int64_t c = 0; c < bn->channels(); ++c) {
      bn->weight().mutable_value()[c] = static_cast<T>(gamma(rng));
      bn->bias().mutable_value()[c] = static_cast<T>(shift(rng));
      bn->running_mean().mutable_value()[c] = static_cast<T>(shift(rng));
      bn->running_var().mutable_value()[c] = static_cast<T>(var(rng));
    }
  });
}

/// Sets every parameter of `m` to zero.
template <typename T>
void zero_parameters(nn::Module<T>& m) {
  for (auto& p : m.named_parameters()) p.var.mutable_value().fill(T(0));
}

}  // namespace litchi::testing
