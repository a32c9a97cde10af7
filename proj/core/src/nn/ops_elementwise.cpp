// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "broadcast.hpp"
#include "litchi/nn/ops.hpp"

namespace litchi::nn {

namespace {

/// Binary op: `f(a, b)` forward, `dfa/dfb(a, b, y)` partials.
template <typename T, typename F, typename DA, typename DB>
Var<T> binary(const Var<T>& a, const Var<T>& b, F f, DA dfa, DB dfb) {
  const Shape out_shape = detail::broadcast_shape(a.shape(), b.shape());
  Tensor<T> out(out_shape);
  const std::array<std::vector<int64_t>, 2> st{detail::broadcast_strides(a.shape(), out_shape),
                                               detail::broadcast_strides(b.shape(), out_shape)};
  {
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    T* po = out.data();
    detail::for_each_broadcast<2>(out_shape, st,
                                  [&](int64_t o, int64_t ia, int64_t ib) { po[o] = f(pa[ia], pb[ib]); });
  }
  return Var<T>::make(std::move(out), {a, b},
                      [st, out_shape, f, dfa, dfb](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        const Tensor<T>& av = in[0]->value;
                        const Tensor<T>& bv = in[1]->value;
                        const bool need_a = in[0]->requires_grad;
                        const bool need_b = in[1]->requires_grad;
                        Tensor<T> ga = need_a ? Tensor<T>(out_shape) : Tensor<T>();
                        Tensor<T> gb = need_b ? Tensor<T>(out_shape) : Tensor<T>();
                        const T* pa = av.data();
                        const T* pb = bv.data();
                        const T* pg = g.data();
                        detail::for_each_broadcast<2>(out_shape, st, [&](int64_t o, int64_t ia, int64_t ib) {
                          const T x = pa[ia];
                          const T y = pb[ib];
                          if (need_a) ga[o] = pg[o] * dfa(x, y);
                          if (need_b) gb[o] = pg[o] * dfb(x, y);
                        });
                        if (need_a) in[0]->accumulate(detail::reduce_to(ga, av.shape()));
                        if (need_b) in[1]->accumulate(detail::reduce_to(gb, bv.shape()));
                      });
}

/// Unary op: `f(x)` forward and `df(x, y)` derivative from input and output.
template <typename T, typename F, typename D>
Var<T> unary(const Var<T>& x, F f, D df) {
  Tensor<T> out(x.shape());
  const T* px = x.value().data();
  T* po = out.data();
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) po[i] = f(px[i]);
  return Var<T>::make(std::move(out), {x}, [df](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    // The output is not retained, so derivatives that need it recompute it.
    const Tensor<T>& xv = in[0]->value;
    Tensor<T> gx(xv.shape());
    const int64_t m = gx.numel();
    for (int64_t i = 0; i < m; ++i) gx[i] = g[i] * df(xv[i]);
    in[0]->accumulate(std::move(gx));
  });
}

template <typename T>
T sigmoid_scalar(T v) {
  if (v >= 0) {
    const T e = std::exp(-v);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <typename T>
T softplus_scalar(T v) {
  return v > T(20) ? v : std::log1p(std::exp(v));
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); }, [](T, T) { return T(-1); });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; }, [](T x, T) { return x; });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
      [](T x, T y) { return -x / (y * y); });
}

template <typename T>
Var<T> maximum(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, [](T x, T y) { return x >= y ? x : y; }, [](T x, T y) { return x >= y ? T(1) : T(0); },
      [](T x, T y) { return x >= y ? T(0) : T(1); });
}

template <typename T>
Var<T> minimum(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, [](T x, T y) { return x <= y ? x : y; }, [](T x, T y) { return x <= y ? T(1) : T(0); },
      [](T x, T y) { return x <= y ? T(0) : T(1); });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T s) {
  return unary(x, [s](T v) { return v + s; }, [](T) { return T(1); });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& x, T s) {
  return unary(x, [s](T v) { return v * s; }, [s](T) { return s; });
}

template <typename T>
Var<T> neg(const Var<T>& x) {
  return mul_scalar(x, T(-1));
}

template <typename T>
Var<T> exp(const Var<T>& x) {
  return unary(x, [](T v) { return std::exp(v); }, [](T v) { return std::exp(v); });
}

template <typename T>
Var<T> log(const Var<T>& x) {
  return unary(x, [](T v) { return std::log(v); }, [](T v) { return T(1) / v; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary(x, sigmoid_scalar<T>, [](T v) {
    const T s = sigmoid_scalar(v);
    return s * (T(1) - s);
  });
}

template <typename T>
Var<T> silu(const Var<T>& x) {
  return unary(x, [](T v) { return v * sigmoid_scalar(v); },
               [](T v) {
                 const T s = sigmoid_scalar(v);
                 return s * (T(1) + v * (T(1) - s));
               });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return unary(x, [](T v) { return v > T(0) ? v : T(0); }, [](T v) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  constexpr T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  constexpr T inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
  return unary(x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
               [](T v) {
                 return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
               });
}

template <typename T>
Var<T> softplus(const Var<T>& x) {
  return unary(x, softplus_scalar<T>, sigmoid_scalar<T>);
}

template <typename T>
Var<T> sqrt(const Var<T>& x) {
  return unary(x, [](T v) { return std::sqrt(v); }, [](T v) { return T(0.5) / std::sqrt(v); });
}

template <typename T>
Var<T> atan(const Var<T>& x) {
  return unary(x, [](T v) { return std::atan(v); }, [](T v) { return T(1) / (T(1) + v * v); });
}

template <typename T>
Var<T> square(const Var<T>& x) {
  return unary(x, [](T v) { return v * v; }, [](T v) { return T(2) * v; });
}

template <typename T>
Var<T> tanh(const Var<T>& x) {
  return unary(x, [](T v) { return std::tanh(v); },
               [](T v) {
                 const T t = std::tanh(v);
                 return T(1) - t * t;
               });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = 0;
  for (T v : x.value().values()) acc += v;
  return Var<T>::make(Tensor<T>::scalar(acc), {x}, [](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    in[0]->accumulate(Tensor<T>(in[0]->value.shape(), g[0]));
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  return mul_scalar(sum(x), T(1) / static_cast<T>(x.value().numel()));
}

template <typename T>
Var<T> sum_dims(const Var<T>& x, const std::vector<int>& axes) {
  Shape target = x.shape();
  for (int a : axes) {
    const int r = static_cast<int>(target.size());
    const int ax = a < 0 ? a + r : a;
    if (ax < 0 || ax >= r) throw ShapeError("sum_dims axis out of range for " + shape_str(x.shape()));
    target[static_cast<size_t>(ax)] = 1;
  }
  Tensor<T> out = detail::reduce_to(x.value(), target);
  return Var<T>::make(std::move(out), {x}, [](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    in[0]->accumulate(detail::expand_to(g, in[0]->value.shape()));
  });
}

template <typename T>
Var<T> mean_dims(const Var<T>& x, const std::vector<int>& axes) {
  Var<T> s = sum_dims(x, axes);
  const T count = static_cast<T>(x.value().numel() / s.value().numel());
  return mul_scalar(s, T(1) / count);
}

template <typename T>
Var<T> bce_with_logits_sum(const Var<T>& logits, const Tensor<T>& targets) {
  if (logits.shape() != targets.shape()) {
    throw ShapeError("bce_with_logits_sum shape mismatch " + shape_str(logits.shape()) + " vs " +
                     shape_str(targets.shape()));
  }
  T acc = 0;
  const Tensor<T>& z = logits.value();
  for (int64_t i = 0; i < z.numel(); ++i) {
    const T v = z[i];
    acc += std::max(v, T(0)) - v * targets[i] + std::log1p(std::exp(-std::abs(v)));
  }
  return Var<T>::make(Tensor<T>::scalar(acc), {logits},
                      [targets](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        const Tensor<T>& zv = in[0]->value;
                        Tensor<T> gz(zv.shape());
                        for (int64_t i = 0; i < zv.numel(); ++i) {
                          gz[i] = g[0] * (sigmoid_scalar(zv[i]) - targets[i]);
                        }
                        in[0]->accumulate(std::move(gz));
                      });
}

#define LITCHI_INSTANTIATE_ELEMENTWISE(T)                                    \
  template Var<T> add(const Var<T>&, const Var<T>&);                         \
  template Var<T> sub(const Var<T>&, const Var<T>&);                         \
  template Var<T> mul(const Var<T>&, const Var<T>&);                         \
  template Var<T> div(const Var<T>&, const Var<T>&);                         \
  template Var<T> maximum(const Var<T>&, const Var<T>&);                     \
  template Var<T> minimum(const Var<T>&, const Var<T>&);                     \
  template Var<T> add_scalar(const Var<T>&, T);                              \
  template Var<T> mul_scalar(const Var<T>&, T);                              \
  template Var<T> neg(const Var<T>&);                                        \
  template Var<T> exp(const Var<T>&);                                        \
  template Var<T> log(const Var<T>&);                                        \
  template Var<T> sigmoid(const Var<T>&);                                    \
  template Var<T> silu(const Var<T>&);                                       \
  template Var<T> relu(const Var<T>&);                                       \
  template Var<T> gelu(const Var<T>&);                                       \
  template Var<T> softplus(const Var<T>&);                                   \
  template Var<T> sqrt(const Var<T>&);                                       \
  template Var<T> atan(const Var<T>&);                                       \
  template Var<T> square(const Var<T>&);                                     \
  template Var<T> tanh(const Var<T>&);                                       \
  template Var<T> sum(const Var<T>&);                                        \
  template Var<T> mean(const Var<T>&);                                       \
  template Var<T> sum_dims(const Var<T>&, const std::vector<int>&);          \
  template Var<T> mean_dims(const Var<T>&, const std::vector<int>&);         \
  template Var<T> bce_with_logits_sum(const Var<T>&, const Tensor<T>&);

LITCHI_INSTANTIATE_ELEMENTWISE(float)
LITCHI_INSTANTIATE_ELEMENTWISE(double)

}  // namespace litchi::nn
