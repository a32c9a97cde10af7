// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>
#include <numeric>

#include "litchi/error.hpp"
#include "litchi/nn/ops.hpp"

namespace litchi::nn {

namespace {

int normalize_axis(int axis, int rank) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
  return a;
}

/// (outer, axis, inner) decomposition of a shape around `axis`.
struct AxisSplit {
  int64_t outer = 1;
  int64_t len = 1;
  int64_t inner = 1;
};

AxisSplit split_around(const Shape& s, int axis) {
  AxisSplit r;
  for (int i = 0; i < axis; ++i) r.outer *= s[static_cast<size_t>(i)];
  r.len = s[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

template <typename T>
void require_rank4(const Var<T>& x, const char* op) {
  if (x.value().rank() != 4) throw ShapeError(std::string(op) + " expects NCHW, got " + shape_str(x.shape()));
}

}  // namespace

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> out = x.value().reshaped(std::move(shape));
  return Var<T>::make(std::move(out), {x}, [](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    in[0]->accumulate(g.reshaped(in[0]->value.shape()));
  });
}

template <typename T>
Var<T> permute(const Var<T>& x, const std::vector<int>& order) {
  const Shape& s = x.shape();
  const size_t r = s.size();
  if (order.size() != r) throw ShapeError("permute order rank mismatch for " + shape_str(s));
  Shape out_shape(r);
  for (size_t i = 0; i < r; ++i) out_shape[i] = s[static_cast<size_t>(order[i])];
  std::vector<int64_t> in_strides(r, 1);
  for (int i = static_cast<int>(r) - 2; i >= 0; --i) in_strides[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(i) + 1] * s[static_cast<size_t>(i) + 1];
  // Source offset for each output element, shared by forward and backward.
  auto offsets = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(shape_numel(out_shape)));
  {
    std::vector<int64_t> idx(r, 0);
    for (size_t o = 0; o < offsets->size(); ++o) {
      int64_t off = 0;
      for (size_t i = 0; i < r; ++i) off += idx[i] * in_strides[static_cast<size_t>(order[i])];
      (*offsets)[o] = off;
      for (int i = static_cast<int>(r) - 1; i >= 0; --i) {
        if (++idx[static_cast<size_t>(i)] < out_shape[static_cast<size_t>(i)]) break;
        idx[static_cast<size_t>(i)] = 0;
      }
    }
  }
  Tensor<T> out(out_shape);
  const T* src = x.value().data();
  for (size_t o = 0; o < offsets->size(); ++o) out[static_cast<int64_t>(o)] = src[(*offsets)[o]];
  return Var<T>::make(std::move(out), {x}, [offsets](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    Tensor<T> gx(in[0]->value.shape());
    for (size_t o = 0; o < offsets->size(); ++o) gx[(*offsets)[o]] += g[static_cast<int64_t>(o)];
    in[0]->accumulate(std::move(gx));
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& xs, int axis) {
  if (xs.empty()) throw ShapeError("concat of zero tensors");
  const Shape& s0 = xs[0].shape();
  const int ax = normalize_axis(axis, static_cast<int>(s0.size()));
  Shape out_shape = s0;
  out_shape[static_cast<size_t>(ax)] = 0;
  std::vector<int64_t> lens;
  for (const auto& x : xs) {
    const Shape& s = x.shape();
    if (s.size() != s0.size()) throw ShapeError("concat rank mismatch");
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != ax && s[i] != s0[i]) {
        throw ShapeError("concat shape mismatch " + shape_str(s) + " vs " + shape_str(s0));
      }
    }
    lens.push_back(s[static_cast<size_t>(ax)]);
    out_shape[static_cast<size_t>(ax)] += s[static_cast<size_t>(ax)];
  }
  const AxisSplit os = split_around(out_shape, ax);
  Tensor<T> out(out_shape);
  int64_t offset = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const T* src = xs[k].value().data();
    const int64_t chunk = lens[k] * os.inner;
    for (int64_t o = 0; o < os.outer; ++o) {
      std::memcpy(out.data() + o * os.len * os.inner + offset * os.inner, src + o * chunk,
                  static_cast<size_t>(chunk) * sizeof(T));
    }
    offset += lens[k];
  }
  return Var<T>::make(std::move(out), xs, [os, lens](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    int64_t off = 0;
    for (size_t k = 0; k < in.size(); ++k) {
      if (in[k] && in[k]->requires_grad) {
        Tensor<T> gk(in[k]->value.shape());
        const int64_t chunk = lens[k] * os.inner;
        for (int64_t o = 0; o < os.outer; ++o) {
          std::memcpy(gk.data() + o * chunk, g.data() + o * os.len * os.inner + off * os.inner,
                      static_cast<size_t>(chunk) * sizeof(T));
        }
        in[k]->accumulate(std::move(gk));
      }
      off += lens[k];
    }
  });
}

template <typename T>
Var<T> slice(const Var<T>& x, int axis, int64_t start, int64_t length) {
  const Shape& s = x.shape();
  const int ax = normalize_axis(axis, static_cast<int>(s.size()));
  if (start < 0 || length < 0 || start + length > s[static_cast<size_t>(ax)]) {
    throw ShapeError("slice [" + std::to_string(start) + ", +" + std::to_string(length) + ") out of range for " +
                     shape_str(s));
  }
  const AxisSplit is = split_around(s, ax);
  Shape out_shape = s;
  out_shape[static_cast<size_t>(ax)] = length;
  Tensor<T> out(out_shape);
  const int64_t chunk = length * is.inner;
  for (int64_t o = 0; o < is.outer; ++o) {
    std::memcpy(out.data() + o * chunk, x.value().data() + o * is.len * is.inner + start * is.inner,
                static_cast<size_t>(chunk) * sizeof(T));
  }
  return Var<T>::make(std::move(out), {x}, [is, start, chunk](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    Tensor<T> gx(in[0]->value.shape());
    for (int64_t o = 0; o < is.outer; ++o) {
      std::memcpy(gx.data() + o * is.len * is.inner + start * is.inner, g.data() + o * chunk,
                  static_cast<size_t>(chunk) * sizeof(T));
    }
    in[0]->accumulate(std::move(gx));
  });
}

template <typename T>
std::vector<Var<T>> split(const Var<T>& x, int axis, const std::vector<int64_t>& sizes) {
  std::vector<Var<T>> parts;
  int64_t start = 0;
  for (int64_t len : sizes) {
    parts.push_back(slice(x, axis, start, len));
    start += len;
  }
  const int ax = normalize_axis(axis, x.value().rank());
  if (start != x.dim(ax)) throw ShapeError("split sizes do not cover axis of " + shape_str(x.shape()));
  return parts;
}

template <typename T>
Var<T> pad2d(const Var<T>& x, int64_t top, int64_t bottom, int64_t left, int64_t right) {
  require_rank4(x, "pad2d");
  const Shape& s = x.shape();
  const int64_t nc = s[0] * s[1], h = s[2], w = s[3];
  const int64_t oh = h + top + bottom, ow = w + left + right;
  Tensor<T> out({s[0], s[1], oh, ow});
  const T* src = x.value().data();
  for (int64_t p = 0; p < nc; ++p) {
    for (int64_t i = 0; i < h; ++i) {
      std::memcpy(out.data() + (p * oh + i + top) * ow + left, src + (p * h + i) * w, static_cast<size_t>(w) * sizeof(T));
    }
  }
  return Var<T>::make(std::move(out), {x},
                      [nc, h, w, oh, ow, top, left](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
                        Tensor<T> gx(in[0]->value.shape());
                        for (int64_t p = 0; p < nc; ++p) {
                          for (int64_t i = 0; i < h; ++i) {
                            std::memcpy(gx.data() + (p * h + i) * w, g.data() + (p * oh + i + top) * ow + left,
                                        static_cast<size_t>(w) * sizeof(T));
                          }
                        }
                        in[0]->accumulate(std::move(gx));
                      });
}

template <typename T>
Var<T> upsample_nearest(const Var<T>& x, int64_t factor) {
  require_rank4(x, "upsample_nearest");
  if (factor < 1) throw ShapeError("upsample factor must be >= 1");
  const Shape& s = x.shape();
  const int64_t nc = s[0] * s[1], h = s[2], w = s[3];
  const int64_t oh = h * factor, ow = w * factor;
  Tensor<T> out({s[0], s[1], oh, ow});
  const T* src = x.value().data();
  for (int64_t p = 0; p < nc; ++p) {
    for (int64_t i = 0; i < oh; ++i) {
      const T* row = src + (p * h + i / factor) * w;
      T* dst = out.data() + (p * oh + i) * ow;
      for (int64_t j = 0; j < ow; ++j) dst[j] = row[j / factor];
    }
  }
  return Var<T>::make(std::move(out), {x}, [nc, h, w, oh, ow, factor](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    Tensor<T> gx(in[0]->value.shape());
    for (int64_t p = 0; p < nc; ++p) {
      for (int64_t i = 0; i < oh; ++i) {
        T* row = gx.data() + (p * h + i / factor) * w;
        const T* src_g = g.data() + (p * oh + i) * ow;
        for (int64_t j = 0; j < ow; ++j) row[j / factor] += src_g[j];
      }
    }
    in[0]->accumulate(std::move(gx));
  });
}

template <typename T>
Var<T> gather_cells(const Var<T>& map, const std::vector<CellRef>& cells) {
  require_rank4(map, "gather_cells");
  const Shape& s = map.shape();
  const int64_t c = s[1], h = s[2], w = s[3];
  for (const CellRef& r : cells) {
    if (r.n < 0 || r.n >= s[0] || r.y < 0 || r.y >= h || r.x < 0 || r.x >= w) {
      throw ShapeError("gather_cells index out of range for " + shape_str(s));
    }
  }
  const int64_t p = static_cast<int64_t>(cells.size());
  Tensor<T> out({p, c});
  const T* src = map.value().data();
  for (int64_t i = 0; i < p; ++i) {
    const CellRef& r = cells[static_cast<size_t>(i)];
    for (int64_t k = 0; k < c; ++k) out[i * c + k] = src[((r.n * c + k) * h + r.y) * w + r.x];
  }
  return Var<T>::make(std::move(out), {map}, [cells, c, h, w](const Tensor<T>& g, const std::vector<NodePtr<T>>& in) {
    Tensor<T> gm(in[0]->value.shape());
    for (size_t i = 0; i < cells.size(); ++i) {
      const CellRef& r = cells[i];
      for (int64_t k = 0; k < c; ++k) {
        gm[((r.n * c + k) * h + r.y) * w + r.x] += g[static_cast<int64_t>(i) * c + k];
      }
    }
    in[0]->accumulate(std::move(gm));
  });
}

#define LITCHI_INSTANTIATE_LAYOUT(T)                                                               \
  template Var<T> reshape(const Var<T>&, Shape);                                                   \
  template Var<T> permute(const Var<T>&, const std::vector<int>&);                                 \
  template Var<T> concat(const std::vector<Var<T>>&, int);                                         \
  template Var<T> slice(const Var<T>&, int, int64_t, int64_t);                                     \
  template std::vector<Var<T>> split(const Var<T>&, int, const std::vector<int64_t>&);             \
  template Var<T> pad2d(const Var<T>&, int64_t, int64_t, int64_t, int64_t);                        \
  template Var<T> upsample_nearest(const Var<T>&, int64_t);                                        \
  template Var<T> gather_cells(const Var<T>&, const std::vector<CellRef>&);

LITCHI_INSTANTIATE_LAYOUT(float)
LITCHI_INSTANTIATE_LAYOUT(double)

}  // namespace litchi::nn
