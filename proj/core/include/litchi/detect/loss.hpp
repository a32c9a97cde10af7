// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/detect/assign.hpp"

namespace litchi::detect {

struct LossWeights {
  double box = 7.5;
  double cls = 0.5;
};

template <typename T>
struct LossBreakdown {
  nn::Var<T> box;
  nn::Var<T> cls;
  nn::Var<T> total;
  size_t positives = 0;

  double box_value() const { return static_cast<double>(box.value()[0]); }
  double cls_value() const { return static_cast<double>(cls.value()[0]); }
  double total_value() const { return static_cast<double>(total.value()[0]); }
};

/// box = sum over positives of (1 - CIoU), cls = logistic loss summed over
/// every cell and class with one-hot targets at positives; both divided by
/// max(1, positives). Throws NumericError if any term is not finite.
template <typename T>
LossBreakdown<T> compute_loss(const std::vector<nn::HeadOutput<T>>& outputs, const AssignResult& targets,
                              const std::vector<int>& strides, const LossWeights& weights = {});

/// Differentiable 1 - CIoU per row for (P, 1) column operands.
template <typename T>
nn::Var<T> ciou_loss(const nn::Var<T>& px1, const nn::Var<T>& py1, const nn::Var<T>& px2, const nn::Var<T>& py2,
                     const nn::Tensor<T>& target);

extern template nn::Var<float> ciou_loss<float>(const nn::Var<float>&, const nn::Var<float>&, const nn::Var<float>&,
                                                const nn::Var<float>&, const nn::Tensor<float>&);
extern template nn::Var<double> ciou_loss<double>(const nn::Var<double>&, const nn::Var<double>&,
                                                  const nn::Var<double>&, const nn::Var<double>&,
                                                  const nn::Tensor<double>&);
extern template LossBreakdown<float> compute_loss<float>(const std::vector<nn::HeadOutput<float>>&,
                                                         const AssignResult&, const std::vector<int>&,
                                                         const LossWeights&);
extern template LossBreakdown<double> compute_loss<double>(const std::vector<nn::HeadOutput<double>>&,
                                                           const AssignResult&, const std::vector<int>&,
                                                           const LossWeights&);

}  // namespace litchi::detect
