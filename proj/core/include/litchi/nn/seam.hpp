// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "litchi/nn/layers.hpp"

namespace litchi::nn {

/// Channel/space mixing over a non-overlapping patch grid: depthwise patch
/// embedding (kernel = stride = patch), GELU, BN; residual depthwise 3x3;
/// pointwise 1x1; then nearest upsampling back to the input size. Inputs are
/// zero-padded on the bottom/right to a patch multiple and the result cropped.
template <typename T>
class Csmm : public Layer<T> {
 public:
  Csmm(int64_t channels, int patch, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

  int patch() const noexcept { return patch_; }

 private:
  int64_t channels_;
  int patch_;
  std::shared_ptr<Conv2d<T>> embed_, dw_, pw_;
  std::shared_ptr<BatchNorm2d<T>> bn_embed_, bn_dw_, bn_pw_;
};

/// Occlusion attention: CSMM branches at patch 6, 7, 8, 1x1 merge, global
/// average pool, two-layer FC to per-channel logits z, A = exp(sigmoid(z)).
/// Output is x + x * A, or x * A with `residual` off.
template <typename T>
class Seam : public Layer<T> {
 public:
  Seam(int64_t channels, InitRng& rng, bool residual = true, int reduction = 16);
  Var<T> forward(const Var<T>& x) override;
  /// Per-channel weights in (1, e), shape (N, C).
  Var<T> attention(const Var<T>& x);

  Linear<T>& fc2() { return *fc2_; }
  bool residual() const noexcept { return residual_; }

 private:
  int64_t channels_;
  bool residual_;
  std::vector<std::shared_ptr<Csmm<T>>> branches_;
  std::shared_ptr<Conv2d<T>> merge_;
  std::shared_ptr<Linear<T>> fc1_, fc2_;
};

extern template class Csmm<float>;
extern template class Csmm<double>;
extern template class Seam<float>;
extern template class Seam<double>;

}  // namespace litchi::nn
