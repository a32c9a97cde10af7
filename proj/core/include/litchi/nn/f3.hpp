// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "litchi/nn/layers.hpp"

namespace litchi::nn {

/// Partial convolution: a 3x3 conv over the first ceil(C * ratio) channels,
/// the rest passed through untouched.
template <typename T>
class PartialConv : public Layer<T> {
 public:
  PartialConv(int64_t channels, InitRng& rng, int ratio_denominator = 4);
  Var<T> forward(const Var<T>& x) override;

  int64_t conv_channels() const noexcept { return conv_channels_; }
  Conv2d<T>& conv() { return *conv_; }

 private:
  int64_t channels_, conv_channels_;
  std::shared_ptr<Conv2d<T>> conv_;
};

/// Largest divisor of `channels` not exceeding `preferred`.
int ema_groups(int64_t channels, int preferred = 8);

/// Efficient multi-scale attention over channel groups folded into the batch.
template <typename T>
class EmaAttention : public Layer<T> {
 public:
  EmaAttention(int64_t channels, InitRng& rng, int groups = 8);
  Var<T> forward(const Var<T>& x) override;
  /// The per-pixel gate in (0, 1), shape (N * groups, 1, H, W).
  Var<T> gate(const Var<T>& x);

  int groups() const noexcept { return groups_; }

 private:
  Var<T> gate_grouped(const Var<T>& gx);

  int64_t channels_;
  int groups_;
  std::shared_ptr<Conv2d<T>> conv1x1_, conv3x3_;
  std::shared_ptr<GroupNorm<T>> gn_;
};

/// 3x3 stem to 2 * c_out, split into (c1, c2), output c1 + EMA(PConv(c2)).
template <typename T>
class F3Block : public Layer<T> {
 public:
  F3Block(int64_t c_in, int64_t c_out, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

  ConvBnAct<T>& stem() { return *stem_; }
  PartialConv<T>& pconv() { return *pconv_; }
  EmaAttention<T>& ema() { return *ema_; }

 private:
  int64_t c_out_;
  std::shared_ptr<ConvBnAct<T>> stem_;
  std::shared_ptr<PartialConv<T>> pconv_;
  std::shared_ptr<EmaAttention<T>> ema_;
};

extern template class PartialConv<float>;
extern template class PartialConv<double>;
extern template class EmaAttention<float>;
extern template class EmaAttention<double>;
extern template class F3Block<float>;
extern template class F3Block<double>;

}  // namespace litchi::nn
