// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/nn/layers.hpp"

namespace litchi::nn {

/// One parallel branch of a dilated reparam block: a k x k kernel at dilation d.
struct DrbBranch {
  int kernel = 3;
  int dilation = 1;
};

/// Trained weights of one branch with the statistics of its BatchNorm.
template <typename T>
struct DrbBranchWeights {
  ConvSpec spec;
  Tensor<T> weight;
  Tensor<T> gamma, beta, mean, var;
  T eps = static_cast<T>(1e-5);
};

template <typename T>
struct MergedKernel {
  Tensor<T> weight;  // (Cout, Cin/groups, k_eq, k_eq)
  Tensor<T> bias;    // (Cout)
  int extent = 0;
  int groups = 1;
};

/// w' = w * gamma / sqrt(var + eps), b' = beta - mean * gamma / sqrt(var + eps).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> fold_batch_norm(const Tensor<T>& weight, const Tensor<T>& gamma,
                                                const Tensor<T>& beta, const Tensor<T>& mean, const Tensor<T>& var,
                                                T eps);

/// Sparse insertion: tap (i, j) lands at (i*d, j*d) of the dense kernel.
template <typename T>
Tensor<T> dilate_kernel(const Tensor<T>& weight, int dilation);

/// Zero-pads the trailing two axes symmetrically up to `extent`.
template <typename T>
Tensor<T> center_pad_kernel(const Tensor<T>& weight, int extent);

/// Folds every branch's BatchNorm, expands dilations, aligns centres and sums.
template <typename T>
MergedKernel<T> drb_merge(const std::vector<DrbBranchWeights<T>>& branches);

enum class ReparamMode { train_multibranch, deploy_merged };

/// Parallel dilated conv+BN branches summed, mergeable into one dense conv.
template <typename T>
class DilatedReparamConv : public Layer<T> {
 public:
  /// `groups` = channels gives the depthwise form.
  DilatedReparamConv(int64_t channels, std::vector<DrbBranch> branches, int groups, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

  /// Freezes the current weights and running statistics into one kernel.
  void switch_to_deploy();
  /// Returns to the multi-branch graph (e.g. to resume training).
  void switch_to_train_branches() { mode_ = ReparamMode::train_multibranch; }
  ReparamMode mode() const noexcept { return mode_; }
  const MergedKernel<T>& merged() const noexcept { return merged_; }

  const std::vector<DrbBranch>& branch_specs() const noexcept { return specs_; }
  std::vector<std::shared_ptr<ConvBnAct<T>>>& branches() noexcept { return branches_; }
  int extent() const noexcept { return extent_; }

 private:
  int64_t channels_;
  int groups_;
  int extent_ = 0;
  std::vector<DrbBranch> specs_;
  std::vector<std::shared_ptr<ConvBnAct<T>>> branches_;
  ReparamMode mode_ = ReparamMode::train_multibranch;
  MergedKernel<T> merged_;
};

extern template class DilatedReparamConv<float>;
extern template class DilatedReparamConv<double>;

}  // namespace litchi::nn
