// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

// Baseline YOLOv11 building blocks, used when a contribution is toggled off.

#pragma once

#include "litchi/nn/layers.hpp"

namespace litchi::nn {

template <typename T>
class Bottleneck : public Layer<T> {
 public:
  Bottleneck(int64_t c_in, int64_t c_out, bool shortcut, InitRng& rng, double expansion = 0.5);
  Var<T> forward(const Var<T>& x) override;

 private:
  bool add_;
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_;
};

/// C3 with n bottlenecks (expansion 1.0 inside).
template <typename T>
class C3k : public Layer<T> {
 public:
  C3k(int64_t c_in, int64_t c_out, int n, bool shortcut, InitRng& rng, double expansion = 0.5);
  Var<T> forward(const Var<T>& x) override;

 private:
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_, cv3_;
  std::shared_ptr<Sequential<T>> m_;
};

/// CSP block with two-way split; inner blocks are C3k or Bottleneck.
template <typename T>
class C3k2 : public Layer<T> {
 public:
  C3k2(int64_t c_in, int64_t c_out, int n, bool c3k, InitRng& rng, double expansion = 0.5, bool shortcut = true);
  Var<T> forward(const Var<T>& x) override;

 private:
  int64_t hidden_;
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_;
  std::vector<std::shared_ptr<Layer<T>>> m_;
};

/// Spatial pyramid pooling (fast): three chained k x k max pools.
template <typename T>
class Sppf : public Layer<T> {
 public:
  Sppf(int64_t c_in, int64_t c_out, InitRng& rng, int kernel = 5);
  Var<T> forward(const Var<T>& x) override;

 private:
  int kernel_;
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_;
};

/// Multi-head self-attention over spatial positions with a depthwise
/// positional encoding on the values.
template <typename T>
class PsaAttention : public Layer<T> {
 public:
  PsaAttention(int64_t dim, int num_heads, InitRng& rng, double attn_ratio = 0.5);
  Var<T> forward(const Var<T>& x) override;

 private:
  int64_t dim_;
  int heads_;
  int64_t head_dim_, key_dim_;
  std::shared_ptr<ConvBnAct<T>> qkv_, proj_, pe_;
};

template <typename T>
class PsaBlock : public Layer<T> {
 public:
  PsaBlock(int64_t c, int num_heads, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

 private:
  std::shared_ptr<PsaAttention<T>> attn_;
  std::shared_ptr<ConvBnAct<T>> ffn1_, ffn2_;
};

template <typename T>
class C2Psa : public Layer<T> {
 public:
  C2Psa(int64_t c, int n, InitRng& rng);
  Var<T> forward(const Var<T>& x) override;

 private:
  int64_t hidden_;
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_;
  std::shared_ptr<Sequential<T>> m_;
};

#define LITCHI_EXTERN_YOLO(Cls)     \
  extern template class Cls<float>; \
  extern template class Cls<double>;
LITCHI_EXTERN_YOLO(Bottleneck)
LITCHI_EXTERN_YOLO(C3k)
LITCHI_EXTERN_YOLO(C3k2)
LITCHI_EXTERN_YOLO(Sppf)
LITCHI_EXTERN_YOLO(PsaAttention)
LITCHI_EXTERN_YOLO(PsaBlock)
LITCHI_EXTERN_YOLO(C2Psa)
#undef LITCHI_EXTERN_YOLO

}  // namespace litchi::nn
