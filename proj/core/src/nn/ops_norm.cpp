// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "litchi/error.hpp"
#include "litchi/nn/ops.hpp"

namespace litchi::nn {

namespace {

void check_channels(const char* op, const Shape& xs, int64_t channels, const Shape& ps) {
  if (xs.size() != 4) throw ShapeError(std::string(op) + " expects NCHW input, got " + shape_str(xs));
  if (ps.size() != 1 || ps[0] != channels) {
    throw ShapeError(std::string(op) + " affine shape " + shape_str(ps) + " does not match " + std::to_string(channels));
  }
}

/// Shared backward for normalisation over groups of `m` contiguous elements:
/// dx = inv_std / m * (m * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat)).
template <typename T>
void normalized_backward(const T* x, const T* g, const T* gamma_per_elem_chan, int64_t m, T mean, T inv_std,
                         int64_t hw, T* gx, T* ggamma, T* gbeta) {
  double s_dxhat = 0, s_dxhat_xhat = 0;
  for (int64_t i = 0; i < m; ++i) {
    const T xhat = (x[i] - mean) * inv_std;
    const T dxhat = g[i] * gamma_per_elem_chan[i / hw];
    s_dxhat += dxhat;
    s_dxhat_xhat += dxhat * xhat;
    if (ggamma) ggamma[i / hw] += g[i] * xhat;
    if (gbeta) gbeta[i / hw] += g[i];
  }
  if (!gx) return;
  const T a = static_cast<T>(s_dxhat / static_cast<double>(m));
  const T b = static_cast<T>(s_dxhat_xhat / static_cast<double>(m));
  for (int64_t i = 0; i < m; ++i) {
    const T xhat = (x[i] - mean) * inv_std;
    const T dxhat = g[i] * gamma_per_elem_chan[i / hw];
    gx[i] += inv_std * (dxhat - a - xhat * b);
  }
}

}  // namespace

template <typename T>
Var<T> batch_norm_train(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                        Tensor<T>& running_var, T momentum, T eps) {
  const int64_t c = x.shape().size() == 4 ? x.dim(1) : -1;
  check_channels("batch_norm", x.shape(), c, gamma.shape());
  const int64_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
  const int64_t m = n * hw;
  if (m < 2) throw ShapeError("batch_norm in training mode needs more than one value per channel");
  std::vector<T> mean(static_cast<size_t>(c)), inv_std(static_cast<size_t>(c));
  const T* xp = x.value().data();
  for (int64_t ch = 0; ch < c; ++ch) {
    double s = 0;
    for (int64_t b = 0; b < n; ++b) {
      const T* p = xp + (b * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) s += p[i];
    }
    const double mu = s / static_cast<double>(m);
    double v = 0;
    for (int64_t b = 0; b < n; ++b) {
      const T* p = xp + (b * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        const double d = p[i] - mu;
        v += d * d;
      }
    }
    const double var = v / static_cast<double>(m);
    mean[ch] = static_cast<T>(mu);
    inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + eps));
    running_mean[ch] = (T(1) - momentum) * running_mean[ch] + momentum * static_cast<T>(mu);
    running_var[ch] = (T(1) - momentum) * running_var[ch] +
                      momentum * static_cast<T>(var * static_cast<double>(m) / static_cast<double>(m - 1));
  }
  Tensor<T> out(x.shape());
  const T* gp = gamma.value().data();
  const T* bp = beta.value().data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const T* p = xp + (b * c + ch) * hw;
      T* o = out.data() + (b * c + ch) * hw;
      const T scale = gp[ch] * inv_std[ch];
      const T shift = bp[ch] - mean[ch] * scale;
      for (int64_t i = 0; i < hw; ++i) o[i] = p[i] * scale + shift;
    }
  }
  return Var<T>::make(std::move(out), {x, gamma, beta},
                      [n, c, hw, m, mean = std::move(mean), inv_std = std::move(inv_std)](
                          const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        const bool need_x = in[0]->requires_grad;
                        const bool need_g = in[1]->requires_grad;
                        const bool need_b = in[2]->requires_grad;
                        const T* xp = in[0]->value.data();
                        const T* gp = in[1]->value.data();
                        Tensor<T> gx = need_x ? Tensor<T>(in[0]->value.shape()) : Tensor<T>();
                        Tensor<T> ggam({c}), gbet({c});
                        for (int64_t ch = 0; ch < c; ++ch) {
                          const T mu = mean[ch], is = inv_std[ch], gam = gp[ch];
                          double s_dy = 0, s_dy_xhat = 0;
                          for (int64_t b = 0; b < n; ++b) {
                            const T* p = xp + (b * c + ch) * hw;
                            const T* gy = g.data() + (b * c + ch) * hw;
                            for (int64_t i = 0; i < hw; ++i) {
                              s_dy += gy[i];
                              s_dy_xhat += gy[i] * (p[i] - mu) * is;
                            }
                          }
                          ggam[ch] = static_cast<T>(s_dy_xhat);
                          gbet[ch] = static_cast<T>(s_dy);
                          if (!need_x) continue;
                          const T a = static_cast<T>(s_dy / static_cast<double>(m));
                          const T bb = static_cast<T>(s_dy_xhat / static_cast<double>(m));
                          const T k = gam * is;
                          for (int64_t b = 0; b < n; ++b) {
                            const T* p = xp + (b * c + ch) * hw;
                            const T* gy = g.data() + (b * c + ch) * hw;
                            T* gxp = gx.data() + (b * c + ch) * hw;
                            for (int64_t i = 0; i < hw; ++i) gxp[i] = k * (gy[i] - a - (p[i] - mu) * is * bb);
                          }
                        }
                        if (need_x) in[0]->accumulate(std::move(gx));
                        if (need_g) in[1]->accumulate(std::move(ggam));
                        if (need_b) in[2]->accumulate(std::move(gbet));
                      });
}

template <typename T>
Var<T> batch_norm_eval(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, const Tensor<T>& running_mean,
                       const Tensor<T>& running_var, T eps) {
  const int64_t c = x.shape().size() == 4 ? x.dim(1) : -1;
  check_channels("batch_norm", x.shape(), c, gamma.shape());
  const int64_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
  std::vector<T> inv_std(static_cast<size_t>(c)), mean(running_mean.data(), running_mean.data() + c);
  for (int64_t ch = 0; ch < c; ++ch) inv_std[ch] = T(1) / std::sqrt(running_var[ch] + eps);
  Tensor<T> out(x.shape());
  const T* xp = x.value().data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const T scale = gamma.value()[ch] * inv_std[ch];
      const T shift = beta.value()[ch] - mean[ch] * scale;
      const T* p = xp + (b * c + ch) * hw;
      T* o = out.data() + (b * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) o[i] = p[i] * scale + shift;
    }
  }
  return Var<T>::make(std::move(out), {x, gamma, beta},
                      [n, c, hw, mean = std::move(mean), inv_std = std::move(inv_std)](
                          const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        const T* xp = in[0]->value.data();
                        const T* gp = in[1]->value.data();
                        Tensor<T> gx = in[0]->requires_grad ? Tensor<T>(in[0]->value.shape()) : Tensor<T>();
                        Tensor<T> ggam({c}), gbet({c});
                        for (int64_t b = 0; b < n; ++b) {
                          for (int64_t ch = 0; ch < c; ++ch) {
                            const T* p = xp + (b * c + ch) * hw;
                            const T* gy = g.data() + (b * c + ch) * hw;
                            const T scale = gp[ch] * inv_std[ch];
                            T sg = 0, sgx = 0;
                            for (int64_t i = 0; i < hw; ++i) {
                              sg += gy[i];
                              sgx += gy[i] * (p[i] - mean[ch]) * inv_std[ch];
                            }
                            ggam[ch] += sgx;
                            gbet[ch] += sg;
                            if (gx.defined()) {
                              T* gxp = gx.data() + (b * c + ch) * hw;
                              for (int64_t i = 0; i < hw; ++i) gxp[i] = gy[i] * scale;
                            }
                          }
                        }
                        if (gx.defined()) in[0]->accumulate(std::move(gx));
                        if (in[1]->requires_grad) in[1]->accumulate(std::move(ggam));
                        if (in[2]->requires_grad) in[2]->accumulate(std::move(gbet));
                      });
}

template <typename T>
Var<T> group_norm(const Var<T>& x, int groups, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const int64_t c = x.shape().size() == 4 ? x.dim(1) : -1;
  check_channels("group_norm", x.shape(), c, gamma.shape());
  if (groups < 1 || c % groups != 0) {
    throw ShapeError("group_norm channels " + std::to_string(c) + " not divisible by " + std::to_string(groups));
  }
  const int64_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
  const int64_t cg = c / groups, m = cg * hw;
  std::vector<T> mean(static_cast<size_t>(n * groups)), inv_std(static_cast<size_t>(n * groups));
  Tensor<T> out(x.shape());
  const T* xp = x.value().data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t gi = 0; gi < groups; ++gi) {
      const int64_t slot = b * groups + gi;
      const T* p = xp + (b * c + gi * cg) * hw;
      double s = 0;
      for (int64_t i = 0; i < m; ++i) s += p[i];
      const double mu = s / static_cast<double>(m);
      double v = 0;
      for (int64_t i = 0; i < m; ++i) v += (p[i] - mu) * (p[i] - mu);
      mean[slot] = static_cast<T>(mu);
      inv_std[slot] = static_cast<T>(1.0 / std::sqrt(v / static_cast<double>(m) + eps));
      T* o = out.data() + (b * c + gi * cg) * hw;
      for (int64_t i = 0; i < m; ++i) {
        const int64_t ch = gi * cg + i / hw;
        o[i] = (p[i] - mean[slot]) * inv_std[slot] * gamma.value()[ch] + beta.value()[ch];
      }
    }
  }
  return Var<T>::make(std::move(out), {x, gamma, beta},
                      [n, c, hw, cg, m, groups, mean = std::move(mean), inv_std = std::move(inv_std)](
                          const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        const T* xp = in[0]->value.data();
                        const T* gp = in[1]->value.data();
                        Tensor<T> gx = in[0]->requires_grad ? Tensor<T>(in[0]->value.shape()) : Tensor<T>();
                        Tensor<T> ggam({c}), gbet({c});
                        for (int64_t b = 0; b < n; ++b) {
                          for (int64_t gi = 0; gi < groups; ++gi) {
                            const int64_t slot = b * groups + gi;
                            const int64_t off = (b * c + gi * cg) * hw;
                            normalized_backward(xp + off, g.data() + off, gp + gi * cg, m, mean[slot], inv_std[slot],
                                                hw, gx.defined() ? gx.data() + off : nullptr, ggam.data() + gi * cg,
                                                gbet.data() + gi * cg);
                          }
                        }
                        if (gx.defined()) in[0]->accumulate(std::move(gx));
                        if (in[1]->requires_grad) in[1]->accumulate(std::move(ggam));
                        if (in[2]->requires_grad) in[2]->accumulate(std::move(gbet));
                      });
}

template <typename T>
Var<T> softmax_last(const Var<T>& x) {
  if (x.value().rank() < 1) throw ShapeError("softmax_last needs rank >= 1");
  const int64_t len = x.dim(-1);
  const int64_t rows = len == 0 ? 0 : x.value().numel() / len;
  Tensor<T> out(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* p = x.value().data() + r * len;
    T* o = out.data() + r * len;
    T mx = -std::numeric_limits<T>::infinity();
    for (int64_t i = 0; i < len; ++i) mx = std::max(mx, p[i]);
    T s = 0;
    for (int64_t i = 0; i < len; ++i) {
      o[i] = std::exp(p[i] - mx);
      s += o[i];
    }
    for (int64_t i = 0; i < len; ++i) o[i] /= s;
  }
  Tensor<T> y = out;
  return Var<T>::make(std::move(out), {x},
                      [rows, len, y = std::move(y)](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        Tensor<T> gx(y.shape());
                        for (int64_t r = 0; r < rows; ++r) {
                          const T* yp = y.data() + r * len;
                          const T* gp = g.data() + r * len;
                          T dot = 0;
                          for (int64_t i = 0; i < len; ++i) dot += gp[i] * yp[i];
                          T* o = gx.data() + r * len;
                          for (int64_t i = 0; i < len; ++i) o[i] = yp[i] * (gp[i] - dot);
                        }
                        in[0]->accumulate(std::move(gx));
                      });
}

template <typename T>
Var<T> max_pool2d(const Var<T>& x, int kernel, int stride, int padding) {
  if (x.value().rank() != 4) throw ShapeError("max_pool2d expects NCHW input, got " + shape_str(x.shape()));
  if (kernel < 1 || stride < 1 || padding < 0 || 2 * padding > kernel) throw ShapeError("max_pool2d invalid geometry");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t oh = (h + 2 * padding - kernel) / stride + 1;
  const int64_t ow = (w + 2 * padding - kernel) / stride + 1;
  if (oh < 1 || ow < 1) throw ShapeError("max_pool2d output would be empty for " + shape_str(x.shape()));
  Tensor<T> out({n, c, oh, ow});
  std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));
  for (int64_t plane = 0; plane < n * c; ++plane) {
    const T* p = x.value().data() + plane * h * w;
    for (int64_t oy = 0; oy < oh; ++oy) {
      for (int64_t ox = 0; ox < ow; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        int64_t best_i = -1;
        for (int64_t ky = 0; ky < kernel; ++ky) {
          const int64_t iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) continue;
          for (int64_t kx = 0; kx < kernel; ++kx) {
            const int64_t ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= w) continue;
            const T v = p[iy * w + ix];
            if (best_i < 0 || v > best) {
              best = v;
              best_i = iy * w + ix;
            }
          }
        }
        const int64_t o = (plane * oh + oy) * ow + ox;
        out[o] = best;
        argmax[o] = plane * h * w + best_i;
      }
    }
  }
  return Var<T>::make(std::move(out), {x},
                      [argmax = std::move(argmax)](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        Tensor<T> gx(in[0]->value.shape());
                        for (size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += g[static_cast<int64_t>(i)];
                        in[0]->accumulate(std::move(gx));
                      });
}

#define LITCHI_INSTANTIATE_NORM(T)                                                                          \
  template Var<T> batch_norm_train(const Var<T>&, const Var<T>&, const Var<T>&, Tensor<T>&, Tensor<T>&, T, T); \
  template Var<T> batch_norm_eval(const Var<T>&, const Var<T>&, const Var<T>&, const Tensor<T>&,             \
                                  const Tensor<T>&, T);                                                       \
  template Var<T> group_norm(const Var<T>&, int, const Var<T>&, const Var<T>&, T);                            \
  template Var<T> softmax_last(const Var<T>&);                                                                \
  template Var<T> max_pool2d(const Var<T>&, int, int, int);

LITCHI_INSTANTIATE_NORM(float)
LITCHI_INSTANTIATE_NORM(double)

}  // namespace litchi::nn
