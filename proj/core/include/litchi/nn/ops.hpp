// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "litchi/nn/autograd.hpp"

namespace litchi::nn {

// Element-wise, numpy-style broadcasting.
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> div(const Var<T>& a, const Var<T>& b);
/// Ties route the gradient to `a`.
template <typename T> Var<T> maximum(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> minimum(const Var<T>& a, const Var<T>& b);

template <typename T> Var<T> add_scalar(const Var<T>& x, T s);
template <typename T> Var<T> mul_scalar(const Var<T>& x, T s);
template <typename T> Var<T> neg(const Var<T>& x);

template <typename T> Var<T> exp(const Var<T>& x);
template <typename T> Var<T> log(const Var<T>& x);
template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> silu(const Var<T>& x);
template <typename T> Var<T> relu(const Var<T>& x);
/// Exact (erf) GELU.
template <typename T> Var<T> gelu(const Var<T>& x);
template <typename T> Var<T> softplus(const Var<T>& x);
template <typename T> Var<T> sqrt(const Var<T>& x);
template <typename T> Var<T> atan(const Var<T>& x);
template <typename T> Var<T> square(const Var<T>& x);
template <typename T> Var<T> tanh(const Var<T>& x);

// Reductions.
template <typename T> Var<T> sum(const Var<T>& x);
template <typename T> Var<T> mean(const Var<T>& x);
/// Sums over `axes`, keeping them as size-1 dimensions.
template <typename T> Var<T> sum_dims(const Var<T>& x, const std::vector<int>& axes);
template <typename T> Var<T> mean_dims(const Var<T>& x, const std::vector<int>& axes);

// Layout.
template <typename T> Var<T> reshape(const Var<T>& x, Shape shape);
template <typename T> Var<T> permute(const Var<T>& x, const std::vector<int>& order);
template <typename T> Var<T> concat(const std::vector<Var<T>>& xs, int axis);
template <typename T> Var<T> slice(const Var<T>& x, int axis, int64_t start, int64_t length);
template <typename T> std::vector<Var<T>> split(const Var<T>& x, int axis, const std::vector<int64_t>& sizes);
/// Zero padding of the two trailing (spatial) axes of an NCHW tensor.
template <typename T> Var<T> pad2d(const Var<T>& x, int64_t top, int64_t bottom, int64_t left, int64_t right);
template <typename T> Var<T> upsample_nearest(const Var<T>& x, int64_t factor);

struct ConvGeometry {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
  int groups = 1;
};

/// NCHW convolution; `weight` is (Cout, Cin/groups, k, k); `bias` may be undefined.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvGeometry& geom);

/// Batch statistics; updates the running estimates in place.
template <typename T>
Var<T> batch_norm_train(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                        Tensor<T>& running_var, T momentum, T eps);
/// Running statistics (a fixed per-channel affine map).
template <typename T>
Var<T> batch_norm_eval(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, const Tensor<T>& running_mean,
                       const Tensor<T>& running_var, T eps);
template <typename T>
Var<T> group_norm(const Var<T>& x, int groups, const Var<T>& gamma, const Var<T>& beta, T eps);

/// x: (N, in), weight: (out, in), bias: (out) or undefined.
template <typename T> Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);
/// Batched product of rank-3 operands with optional transposes of the trailing two axes.
template <typename T> Var<T> bmm(const Var<T>& a, const Var<T>& b, bool transpose_a = false, bool transpose_b = false);
template <typename T> Var<T> softmax_last(const Var<T>& x);
template <typename T> Var<T> max_pool2d(const Var<T>& x, int kernel, int stride, int padding);

/// Sum over all elements of the numerically stable logistic loss.
template <typename T> Var<T> bce_with_logits_sum(const Var<T>& logits, const Tensor<T>& targets);

struct CellRef {
  int64_t n = 0;
  int64_t y = 0;
  int64_t x = 0;
};

/// Rows (P, C) picked from an NCHW map at the given cells.
template <typename T> Var<T> gather_cells(const Var<T>& map, const std::vector<CellRef>& cells);

/// Multiply-accumulate tally for convolution and linear ops executed on this
/// thread while an instance is alive (innermost instance wins).
class MacCounter {
 public:
  MacCounter();
  ~MacCounter();
  MacCounter(const MacCounter&) = delete;
  MacCounter& operator=(const MacCounter&) = delete;

  int64_t macs() const noexcept { return macs_; }
  static void record(int64_t macs) noexcept;

 private:
  int64_t macs_ = 0;
  MacCounter* previous_;
};

}  // namespace litchi::nn
