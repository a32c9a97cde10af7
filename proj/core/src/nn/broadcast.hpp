// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

// Internal strided iteration for broadcasting element-wise kernels.

#pragma once

#include <array>
#include <cstdint>
#include <tuple>
#include <vector>

#include "litchi/error.hpp"
#include "litchi/nn/tensor.hpp"

namespace litchi::nn::detail {

/// Output shape of a numpy-style broadcast between `a` and `b`.
inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  const size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (size_t i = 0; i < r; ++i) {
    const int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    }
    out[i] = da == 1 ? db : da;
  }
  return out;
}

/// Element strides of `in` viewed under `out` (zero on broadcast axes).
inline std::vector<int64_t> broadcast_strides(const Shape& in, const Shape& out) {
  const size_t r = out.size();
  std::vector<int64_t> st(r, 0);
  int64_t s = 1;
  for (size_t k = 0; k < in.size(); ++k) {
    const size_t i_in = in.size() - 1 - k;
    const size_t i_out = r - 1 - k;
    st[i_out] = in[i_in] == 1 && out[i_out] != 1 ? 0 : s;
    s *= in[i_in];
  }
  return st;
}

/// Iterates `out_shape` calling `fn(o, i0, ..., iN-1)` with the flat output
/// offset and each operand's flat offset. Adjacent axes that are contiguous
/// (or jointly broadcast) for every operand are merged first so common cases
/// run as one or two tight loops.
template <size_t N, typename Fn>
void for_each_broadcast(const Shape& out_shape, const std::array<std::vector<int64_t>, N>& strides, Fn&& fn) {
  std::vector<int64_t> dims;
  std::array<std::vector<int64_t>, N> st;
  for (size_t i = 0; i < out_shape.size(); ++i) {
    if (out_shape[i] == 1) continue;
    bool merge = !dims.empty();
    if (merge) {
      for (size_t k = 0; k < N; ++k) {
        if (st[k].back() != strides[k][i] * out_shape[i]) merge = false;
      }
    }
    if (merge) {
      dims.back() *= out_shape[i];
      for (size_t k = 0; k < N; ++k) st[k].back() = strides[k][i];
    } else {
      dims.push_back(out_shape[i]);
      for (size_t k = 0; k < N; ++k) st[k].push_back(strides[k][i]);
    }
  }
  if (dims.empty()) {
    dims.push_back(1);
    for (size_t k = 0; k < N; ++k) st[k].push_back(0);
  }
  for (int64_t d : dims) {
    if (d == 0) return;
  }
  const size_t r = dims.size();
  const int64_t inner = dims[r - 1];
  std::array<int64_t, N> inner_st{};
  for (size_t k = 0; k < N; ++k) inner_st[k] = st[k][r - 1];
  std::vector<int64_t> idx(r, 0);
  std::array<int64_t, N> base{};
  int64_t o = 0;
  while (true) {
    std::array<int64_t, N> off = base;
    for (int64_t j = 0; j < inner; ++j) {
      std::apply([&](auto... offs) { fn(o, offs...); }, off);
      ++o;
      for (size_t k = 0; k < N; ++k) off[k] += inner_st[k];
    }
    // Advance the odometer over the outer axes.
    int64_t axis = static_cast<int64_t>(r) - 2;
    while (axis >= 0) {
      const size_t a = static_cast<size_t>(axis);
      ++idx[a];
      for (size_t k = 0; k < N; ++k) base[k] += st[k][a];
      if (idx[a] < dims[a]) break;
      for (size_t k = 0; k < N; ++k) base[k] -= st[k][a] * dims[a];
      idx[a] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
}

/// Sums `grad` (shaped `out_shape`) down to `target` by reducing broadcast axes.
template <typename T>
Tensor<T> reduce_to(const Tensor<T>& grad, const Shape& target) {
  if (grad.shape() == target) return grad;
  Tensor<T> out(target);
  const Shape& os = grad.shape();
  std::array<std::vector<int64_t>, 2> st{broadcast_strides(os, os), broadcast_strides(target, os)};
  const T* g = grad.data();
  T* dst = out.data();
  for_each_broadcast<2>(os, st, [&](int64_t, int64_t gi, int64_t ti) { dst[ti] += g[gi]; });
  return out;
}

/// Materializes `src` broadcast to `out_shape`.
template <typename T>
Tensor<T> expand_to(const Tensor<T>& src, const Shape& out_shape) {
  if (src.shape() == out_shape) return src;
  Tensor<T> out(out_shape);
  std::array<std::vector<int64_t>, 2> st{broadcast_strides(out_shape, out_shape),
                                         broadcast_strides(src.shape(), out_shape)};
  const T* s = src.data();
  T* dst = out.data();
  for_each_broadcast<2>(out_shape, st, [&](int64_t, int64_t oi, int64_t si) { dst[oi] = s[si]; });
  return out;
}

}  // namespace litchi::nn::detail
