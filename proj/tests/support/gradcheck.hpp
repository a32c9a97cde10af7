// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "litchi/nn/ops.hpp"

namespace litchi::testing {

using nn::Tensor;
using nn::Var;

inline Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

struct GradcheckResult {
  double max_abs_error = 0;
  double max_rel_error = 0;
  std::string worst;
};

/// Compares reverse-mode gradients of `sum(f(inputs) * w)` (w fixed random)
/// with central differences for every element of every input.
inline GradcheckResult gradcheck(const std::function<Var<double>(const std::vector<Var<double>>&)>& f,
                                 std::vector<Tensor<double>> inputs, uint64_t seed = 7, double h = 1e-6) {
  std::mt19937_64 rng(seed);
  std::vector<Var<double>> vars;
  for (auto& t : inputs) vars.emplace_back(t, true);
  Var<double> y = f(vars);
  const Tensor<double> w = random_tensor(y.shape(), rng);
  auto scalar = [&](const std::vector<Var<double>>& xs) {
    nn::NoGradGuard guard;
    Var<double> out = f(xs);
    double s = 0;
    for (int64_t i = 0; i < out.value().numel(); ++i) s += out.value()[i] * w[i];
    return s;
  };
  y.backward(w);
  GradcheckResult res;
  for (size_t k = 0; k < vars.size(); ++k) {
    const Tensor<double> analytic = vars[k].grad().defined() ? vars[k].grad() : Tensor<double>(inputs[k].shape());
    for (int64_t i = 0; i < inputs[k].numel(); ++i) {
      std::vector<Var<double>> plus, minus;
      for (size_t j = 0; j < inputs.size(); ++j) {
        Tensor<double> a = inputs[j], b = inputs[j];
        if (j == k) {
          a[i] += h;
          b[i] -= h;
        }
        plus.emplace_back(a, false);
        minus.emplace_back(b, false);
      }
      const double numeric = (scalar(plus) - scalar(minus)) / (2 * h);
      const double err = std::abs(numeric - analytic[i]);
      const double rel = err / std::max(1.0, std::abs(numeric));
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst = "input " + std::to_string(k) + " elem " + std::to_string(i) + ": numeric " +
                    std::to_string(numeric) + " analytic " + std::to_string(analytic[i]);
      }
      res.max_abs_error = std::max(res.max_abs_error, err);
    }
  }
  return res;
}

}  // namespace litchi::testing
