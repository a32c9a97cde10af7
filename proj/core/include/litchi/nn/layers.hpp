// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "litchi/nn/module.hpp"
#include "litchi/nn/ops.hpp"

namespace litchi::nn {

enum class Act { none, silu, relu, gelu };

template <typename T>
Var<T> activate(const Var<T>& x, Act act);

/// Static description of one convolution, as listed in checkpoint manifests.
struct ConvSpec {
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int dilation = 1;
  int groups = 1;
  bool bias = false;
  bool has_bn = false;

  /// Dense extent covered by the dilated kernel.
  int equivalent_extent() const { return kernel + (kernel - 1) * (dilation - 1); }
  int64_t weight_count() const { return out_channels * (in_channels / groups) * kernel * kernel; }
};

/// Padding that keeps the spatial size at stride 1.
inline int same_padding(int kernel, int dilation = 1) { return dilation * (kernel - 1) / 2; }

template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(const ConvSpec& spec, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

  const ConvSpec& spec() const noexcept { return spec_; }
  Var<T>& weight() noexcept { return weight_; }
  Var<T>& bias() noexcept { return bias_; }
  /// Spatial size of the most recent input, for analytic cost walkers.
  std::optional<std::pair<int64_t, int64_t>> last_input_hw() const noexcept { return last_hw_; }
  /// Leading dimension of the most recent input. Blocks that fold channel
  /// groups into the batch axis make this exceed the model batch.
  int64_t last_input_batch() const noexcept { return last_batch_; }

 private:
  ConvSpec spec_;
  Var<T> weight_;
  Var<T> bias_;
  std::optional<std::pair<int64_t, int64_t>> last_hw_;
  int64_t last_batch_ = 0;
};

template <typename T>
class BatchNorm2d : public Layer<T> {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  explicit BatchNorm2d(int64_t channels);
  Var<T> forward(const Var<T>& x) override;

  int64_t channels() const noexcept { return channels_; }
  Var<T>& weight() noexcept { return weight_; }
  Var<T>& bias() noexcept { return bias_; }
  Var<T>& running_mean() noexcept { return running_mean_; }
  Var<T>& running_var() noexcept { return running_var_; }

 private:
  int64_t channels_;
  Var<T> weight_, bias_, running_mean_, running_var_;
};

/// Convolution without bias, BatchNorm, activation: the basic YOLO-family unit.
template <typename T>
class ConvBnAct : public Layer<T> {
 public:
  ConvBnAct(int64_t c_in, int64_t c_out, int kernel, InitRng& rng, int stride = 1, int groups = 1, Act act = Act::silu,
            int dilation = 1);
  Var<T> forward(const Var<T>& x) override;

  Conv2d<T>& conv() { return *conv_; }
  BatchNorm2d<T>& bn() { return *bn_; }
  Act act() const noexcept { return act_; }

 private:
  std::shared_ptr<Conv2d<T>> conv_;
  std::shared_ptr<BatchNorm2d<T>> bn_;
  Act act_;
};

/// Depthwise 3x3 followed by pointwise 1x1, each with BatchNorm and SiLU.
template <typename T>
class DepthwiseSeparable : public Layer<T> {
 public:
  DepthwiseSeparable(int64_t c_in, int64_t c_out, InitRng& rng, int kernel = 3);
  Var<T> forward(const Var<T>& x) override;

 private:
  std::shared_ptr<ConvBnAct<T>> dw_, pw_;
};

template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(int64_t in_features, int64_t out_features, bool bias, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

  int64_t in_features() const noexcept { return in_; }
  int64_t out_features() const noexcept { return out_; }
  bool has_bias() const noexcept { return bias_.defined(); }
  Var<T>& weight() noexcept { return weight_; }

 private:
  int64_t in_, out_;
  Var<T> weight_, bias_;
};

template <typename T>
class GroupNorm : public Layer<T> {
 public:
  GroupNorm(int groups, int64_t channels);
  Var<T> forward(const Var<T>& x) override;

  int groups() const noexcept { return groups_; }
  int64_t channels() const noexcept { return channels_; }

 private:
  int groups_;
  int64_t channels_;
  Var<T> weight_, bias_;
};

#define LITCHI_EXTERN_LAYER(Cls)   \
  extern template class Cls<float>; \
  extern template class Cls<double>;
LITCHI_EXTERN_LAYER(Conv2d)
LITCHI_EXTERN_LAYER(BatchNorm2d)
LITCHI_EXTERN_LAYER(ConvBnAct)
LITCHI_EXTERN_LAYER(DepthwiseSeparable)
LITCHI_EXTERN_LAYER(Linear)
LITCHI_EXTERN_LAYER(GroupNorm)
#undef LITCHI_EXTERN_LAYER

}  // namespace litchi::nn
