// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

#include "litchi/error.hpp"
#include "litchi/nn/ops.hpp"

namespace litchi::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

thread_local MacCounter* g_counter = nullptr;

struct ConvDims {
  int64_t n, cin, h, w;
  int64_t cout, k;
  int64_t oh, ow;
  int64_t cin_g, cout_g;
  int stride, pad, dil, groups;
};

ConvDims conv_dims(const Shape& xs, const Shape& ws, const ConvGeometry& g) {
  if (xs.size() != 4 || ws.size() != 4) {
    throw ShapeError("conv2d expects NCHW input and OIHW weight, got " + shape_str(xs) + ", " + shape_str(ws));
  }
  if (g.stride < 1 || g.dilation < 1 || g.groups < 1 || g.padding < 0) throw ShapeError("conv2d invalid geometry");
  ConvDims d{};
  d.n = xs[0];
  d.cin = xs[1];
  d.h = xs[2];
  d.w = xs[3];
  d.cout = ws[0];
  d.k = ws[2];
  if (ws[3] != d.k) throw ShapeError("conv2d expects square kernels, got " + shape_str(ws));
  d.stride = g.stride;
  d.pad = g.padding;
  d.dil = g.dilation;
  d.groups = g.groups;
  if (d.cin % g.groups != 0 || d.cout % g.groups != 0) {
    throw ShapeError("conv2d channels " + std::to_string(d.cin) + "->" + std::to_string(d.cout) +
                     " not divisible by groups " + std::to_string(g.groups));
  }
  d.cin_g = d.cin / g.groups;
  d.cout_g = d.cout / g.groups;
  if (ws[1] != d.cin_g) {
    throw ShapeError("conv2d weight " + shape_str(ws) + " does not match input channels " + std::to_string(d.cin));
  }
  const int64_t extent = d.dil * (d.k - 1) + 1;
  d.oh = (d.h + 2 * d.pad - extent) / d.stride + 1;
  d.ow = (d.w + 2 * d.pad - extent) / d.stride + 1;
  if (d.oh < 1 || d.ow < 1) throw ShapeError("conv2d output would be empty for input " + shape_str(xs));
  return d;
}

bool is_pointwise(const ConvDims& d) { return d.k == 1 && d.stride == 1 && d.pad == 0; }
bool is_depthwise(const ConvDims& d) { return d.groups == d.cin && d.cin == d.cout && d.groups > 1; }

/// Unfolds one group of one image into a (cin_g*k*k, oh*ow) matrix.
template <typename T>
void im2col(const T* img, const ConvDims& d, T* col) {
  const int64_t ohw = d.oh * d.ow;
  for (int64_t c = 0; c < d.cin_g; ++c) {
    const T* plane = img + c * d.h * d.w;
    for (int64_t ki = 0; ki < d.k; ++ki) {
      for (int64_t kj = 0; kj < d.k; ++kj) {
        T* row = col + ((c * d.k + ki) * d.k + kj) * ohw;
        for (int64_t oy = 0; oy < d.oh; ++oy) {
          const int64_t iy = oy * d.stride - d.pad + ki * d.dil;
          T* dst = row + oy * d.ow;
          if (iy < 0 || iy >= d.h) {
            std::fill(dst, dst + d.ow, T(0));
            continue;
          }
          const T* src = plane + iy * d.w;
          for (int64_t ox = 0; ox < d.ow; ++ox) {
            const int64_t ix = ox * d.stride - d.pad + kj * d.dil;
            dst[ox] = (ix >= 0 && ix < d.w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvDims& d, T* img) {
  const int64_t ohw = d.oh * d.ow;
  for (int64_t c = 0; c < d.cin_g; ++c) {
    T* plane = img + c * d.h * d.w;
    for (int64_t ki = 0; ki < d.k; ++ki) {
      for (int64_t kj = 0; kj < d.k; ++kj) {
        const T* row = col + ((c * d.k + ki) * d.k + kj) * ohw;
        for (int64_t oy = 0; oy < d.oh; ++oy) {
          const int64_t iy = oy * d.stride - d.pad + ki * d.dil;
          if (iy < 0 || iy >= d.h) continue;
          T* dst = plane + iy * d.w;
          const T* src = row + oy * d.ow;
          for (int64_t ox = 0; ox < d.ow; ++ox) {
            const int64_t ix = ox * d.stride - d.pad + kj * d.dil;
            if (ix >= 0 && ix < d.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void depthwise_forward(const T* x, const T* wt, const ConvDims& d, T* y) {
  for (int64_t n = 0; n < d.n; ++n) {
    for (int64_t c = 0; c < d.cin; ++c) {
      const T* plane = x + (n * d.cin + c) * d.h * d.w;
      const T* kern = wt + c * d.k * d.k;
      T* out = y + (n * d.cout + c) * d.oh * d.ow;
      for (int64_t ki = 0; ki < d.k; ++ki) {
        for (int64_t kj = 0; kj < d.k; ++kj) {
          const T wv = kern[ki * d.k + kj];
          for (int64_t oy = 0; oy < d.oh; ++oy) {
            const int64_t iy = oy * d.stride - d.pad + ki * d.dil;
            if (iy < 0 || iy >= d.h) continue;
            const T* src = plane + iy * d.w;
            T* dst = out + oy * d.ow;
            for (int64_t ox = 0; ox < d.ow; ++ox) {
              const int64_t ix = ox * d.stride - d.pad + kj * d.dil;
              if (ix >= 0 && ix < d.w) dst[ox] += wv * src[ix];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void depthwise_backward(const T* x, const T* wt, const T* gy, const ConvDims& d, T* gx, T* gw) {
  for (int64_t n = 0; n < d.n; ++n) {
    for (int64_t c = 0; c < d.cin; ++c) {
      const T* plane = x + (n * d.cin + c) * d.h * d.w;
      T* gplane = gx ? gx + (n * d.cin + c) * d.h * d.w : nullptr;
      const T* kern = wt + c * d.k * d.k;
      T* gkern = gw ? gw + c * d.k * d.k : nullptr;
      const T* g = gy + (n * d.cout + c) * d.oh * d.ow;
      for (int64_t ki = 0; ki < d.k; ++ki) {
        for (int64_t kj = 0; kj < d.k; ++kj) {
          const T wv = kern[ki * d.k + kj];
          T acc = 0;
          for (int64_t oy = 0; oy < d.oh; ++oy) {
            const int64_t iy = oy * d.stride - d.pad + ki * d.dil;
            if (iy < 0 || iy >= d.h) continue;
            const T* src = plane + iy * d.w;
            const T* grow = g + oy * d.ow;
            T* gdst = gplane ? gplane + iy * d.w : nullptr;
            for (int64_t ox = 0; ox < d.ow; ++ox) {
              const int64_t ix = ox * d.stride - d.pad + kj * d.dil;
              if (ix < 0 || ix >= d.w) continue;
              acc += grow[ox] * src[ix];
              if (gdst) gdst[ix] += wv * grow[ox];
            }
          }
          if (gkern) gkern[ki * d.k + kj] += acc;
        }
      }
    }
  }
}

}  // namespace

MacCounter::MacCounter() : previous_(g_counter) { g_counter = this; }
MacCounter::~MacCounter() { g_counter = previous_; }
void MacCounter::record(int64_t macs) noexcept {
  if (g_counter) g_counter->macs_ += macs;
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvGeometry& geom) {
  const ConvDims d = conv_dims(x.shape(), weight.shape(), geom);
  if (bias.defined() && (bias.value().rank() != 1 || bias.dim(0) != d.cout)) {
    throw ShapeError("conv2d bias shape " + shape_str(bias.shape()) + " does not match " + std::to_string(d.cout));
  }
  MacCounter::record(d.n * d.cout * d.oh * d.ow * d.cin_g * d.k * d.k);
  Tensor<T> out({d.n, d.cout, d.oh, d.ow});
  const T* xp = x.value().data();
  const T* wp = weight.value().data();
  const int64_t ohw = d.oh * d.ow;
  const int64_t kk = d.cin_g * d.k * d.k;
  if (is_depthwise(d)) {
    depthwise_forward(xp, wp, d, out.data());
  } else {
    std::vector<T> col(is_pointwise(d) ? 0 : static_cast<size_t>(kk * ohw));
    for (int64_t n = 0; n < d.n; ++n) {
      for (int64_t g = 0; g < d.groups; ++g) {
        const T* img = xp + (n * d.cin + g * d.cin_g) * d.h * d.w;
        const T* colp = img;
        if (!is_pointwise(d)) {
          im2col(img, d, col.data());
          colp = col.data();
        }
        ConstMatMap<T> wm(wp + g * d.cout_g * kk, d.cout_g, kk);
        ConstMatMap<T> cm(colp, kk, ohw);
        MatMap<T> om(out.data() + (n * d.cout + g * d.cout_g) * ohw, d.cout_g, ohw);
        om.noalias() = wm * cm;
      }
    }
  }
  if (bias.defined()) {
    const T* bp = bias.value().data();
    for (int64_t n = 0; n < d.n; ++n) {
      for (int64_t c = 0; c < d.cout; ++c) {
        T* o = out.data() + (n * d.cout + c) * ohw;
        for (int64_t i = 0; i < ohw; ++i) o[i] += bp[c];
      }
    }
  }
  return Var<T>::make(std::move(out), {x, weight, bias}, [d](const Tensor<T>& gy, const std::vector<NodePtr<T>>& in) {
    const bool need_x = in[0]->requires_grad;
    const bool need_w = in[1]->requires_grad;
    const bool need_b = in[2] && in[2]->requires_grad;
    const T* xp = in[0]->value.data();
    const T* wp = in[1]->value.data();
    const int64_t ohw = d.oh * d.ow;
    const int64_t kk = d.cin_g * d.k * d.k;
    Tensor<T> gx = need_x ? Tensor<T>(in[0]->value.shape()) : Tensor<T>();
    Tensor<T> gw = need_w ? Tensor<T>(in[1]->value.shape()) : Tensor<T>();
    if (is_depthwise(d)) {
      depthwise_backward(xp, wp, gy.data(), d, need_x ? gx.data() : nullptr, need_w ? gw.data() : nullptr);
    } else {
      const bool pw = is_pointwise(d);
      std::vector<T> col(pw ? 0 : static_cast<size_t>(kk * ohw));
      std::vector<T> gcol(pw || !need_x ? 0 : static_cast<size_t>(kk * ohw));
      for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t g = 0; g < d.groups; ++g) {
          const T* img = xp + (n * d.cin + g * d.cin_g) * d.h * d.w;
          ConstMatMap<T> gym(gy.data() + (n * d.cout + g * d.cout_g) * ohw, d.cout_g, ohw);
          ConstMatMap<T> wm(wp + g * d.cout_g * kk, d.cout_g, kk);
          if (need_w) {
            const T* colp = img;
            if (!pw) {
              im2col(img, d, col.data());
              colp = col.data();
            }
            ConstMatMap<T> cm(colp, kk, ohw);
            MatMap<T> gwm(gw.data() + g * d.cout_g * kk, d.cout_g, kk);
            gwm.noalias() += gym * cm.transpose();
          }
          if (need_x) {
            T* gimg = gx.data() + (n * d.cin + g * d.cin_g) * d.h * d.w;
            if (pw) {
              MatMap<T> gxm(gimg, kk, ohw);
              gxm.noalias() += wm.transpose() * gym;
            } else {
              MatMap<T> gcm(gcol.data(), kk, ohw);
              gcm.noalias() = wm.transpose() * gym;
              col2im(gcol.data(), d, gimg);
            }
          }
        }
      }
    }
    if (need_x) in[0]->accumulate(std::move(gx));
    if (need_w) in[1]->accumulate(std::move(gw));
    if (need_b) {
      Tensor<T> gb({d.cout});
      for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t c = 0; c < d.cout; ++c) {
          const T* g = gy.data() + (n * d.cout + c) * ohw;
          T acc = 0;
          for (int64_t i = 0; i < ohw; ++i) acc += g[i];
          gb[c] += acc;
        }
      }
      in[2]->accumulate(std::move(gb));
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  if (x.value().rank() != 2 || weight.value().rank() != 2 || x.dim(1) != weight.dim(1)) {
    throw ShapeError("linear shape mismatch " + shape_str(x.shape()) + " x " + shape_str(weight.shape()));
  }
  const int64_t n = x.dim(0), fin = x.dim(1), fout = weight.dim(0);
  MacCounter::record(n * fin * fout);
  Tensor<T> out({n, fout});
  MatMap<T> om(out.data(), n, fout);
  om.noalias() = ConstMatMap<T>(x.value().data(), n, fin) * ConstMatMap<T>(weight.value().data(), fout, fin).transpose();
  if (bias.defined()) {
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < fout; ++j) out[i * fout + j] += bias.value()[j];
    }
  }
  return Var<T>::make(std::move(out), {x, weight, bias}, [n, fin, fout](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    ConstMatMap<T> gm(g.data(), n, fout);
    if (in[0]->requires_grad) {
      Tensor<T> gx({n, fin});
      MatMap<T>(gx.data(), n, fin).noalias() = gm * ConstMatMap<T>(in[1]->value.data(), fout, fin);
      in[0]->accumulate(std::move(gx));
    }
    if (in[1]->requires_grad) {
      Tensor<T> gw({fout, fin});
      MatMap<T>(gw.data(), fout, fin).noalias() = gm.transpose() * ConstMatMap<T>(in[0]->value.data(), n, fin);
      in[1]->accumulate(std::move(gw));
    }
    if (in[2] && in[2]->requires_grad) {
      Tensor<T> gb({fout});
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < fout; ++j) gb[j] += g[i * fout + j];
      }
      in[2]->accumulate(std::move(gb));
    }
  });
}

template <typename T>
Var<T> bmm(const Var<T>& a, const Var<T>& b, bool ta, bool tb) {
  if (a.value().rank() != 3 || b.value().rank() != 3 || a.dim(0) != b.dim(0)) {
    throw ShapeError("bmm expects matching rank-3 operands, got " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const int64_t batch = a.dim(0);
  const int64_t ar = a.dim(1), ac = a.dim(2), br = b.dim(1), bc = b.dim(2);
  const int64_t m = ta ? ac : ar, k = ta ? ar : ac;
  const int64_t kb = tb ? bc : br, nn = tb ? br : bc;
  if (k != kb) throw ShapeError("bmm inner dimension mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor<T> out({batch, m, nn});
  for (int64_t i = 0; i < batch; ++i) {
    ConstMatMap<T> am(a.value().data() + i * ar * ac, ar, ac);
    ConstMatMap<T> bm(b.value().data() + i * br * bc, br, bc);
    MatMap<T> om(out.data() + i * m * nn, m, nn);
    if (ta && tb) om.noalias() = am.transpose() * bm.transpose();
    else if (ta) om.noalias() = am.transpose() * bm;
    else if (tb) om.noalias() = am * bm.transpose();
    else om.noalias() = am * bm;
  }
  return Var<T>::make(std::move(out), {a, b}, [=](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    // With A' = op(A), B' = op(B): dA' = G B'^T and dB' = A'^T G.
    Tensor<T> ga = in[0]->requires_grad ? Tensor<T>(in[0]->value.shape()) : Tensor<T>();
    Tensor<T> gb = in[1]->requires_grad ? Tensor<T>(in[1]->value.shape()) : Tensor<T>();
    for (int64_t i = 0; i < batch; ++i) {
      ConstMatMap<T> gm(g.data() + i * m * nn, m, nn);
      ConstMatMap<T> am(in[0]->value.data() + i * ar * ac, ar, ac);
      ConstMatMap<T> bm(in[1]->value.data() + i * br * bc, br, bc);
      if (ga.defined()) {
        MatMap<T> gam(ga.data() + i * ar * ac, ar, ac);
        if (!ta && !tb) gam.noalias() = gm * bm.transpose();
        else if (!ta && tb) gam.noalias() = gm * bm;
        else if (ta && !tb) gam.noalias() = bm * gm.transpose();
        else gam.noalias() = bm.transpose() * gm.transpose();
      }
      if (gb.defined()) {
        MatMap<T> gbm(gb.data() + i * br * bc, br, bc);
        if (!ta && !tb) gbm.noalias() = am.transpose() * gm;
        else if (!ta && tb) gbm.noalias() = gm.transpose() * am;
        else if (ta && !tb) gbm.noalias() = am * gm;
        else gbm.noalias() = gm.transpose() * am.transpose();
      }
    }
    if (ga.defined()) in[0]->accumulate(std::move(ga));
    if (gb.defined()) in[1]->accumulate(std::move(gb));
  });
}

#define LITCHI_INSTANTIATE_CONV(T)                                                        \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvGeometry&); \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                    \
  template Var<T> bmm(const Var<T>&, const Var<T>&, bool, bool);

LITCHI_INSTANTIATE_CONV(float)
LITCHI_INSTANTIATE_CONV(double)

}  // namespace litchi::nn
