// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/drb.hpp"

#include <algorithm>
#include <cmath>

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
std::pair<Tensor<T>, Tensor<T>> fold_batch_norm(const Tensor<T>& weight, const Tensor<T>& gamma,
                                                const Tensor<T>& beta, const Tensor<T>& mean, const Tensor<T>& var,
                                                T eps) {
  const int64_t cout = weight.dim(0);
  if (gamma.numel() != cout || beta.numel() != cout || mean.numel() != cout || var.numel() != cout) {
    throw ShapeError("batch norm statistics do not match " + std::to_string(cout) + " output channels");
  }
  Tensor<T> w = weight;
  Tensor<T> b({cout});
  const int64_t per = weight.numel() / cout;
  for (int64_t o = 0; o < cout; ++o) {
    const T s = gamma[o] / std::sqrt(var[o] + eps);
    for (int64_t i = 0; i < per; ++i) w[o * per + i] *= s;
    b[o] = beta[o] - mean[o] * s;
  }
  return {std::move(w), std::move(b)};
}

template <typename T>
Tensor<T> dilate_kernel(const Tensor<T>& weight, int dilation) {
  if (dilation < 1) throw DomainError("dilation", "must be >= 1");
  if (dilation == 1) return weight;
  const int64_t o = weight.dim(0), i = weight.dim(1), k = weight.dim(2);
  const int64_t ke = k + (k - 1) * (dilation - 1);
  Tensor<T> out({o, i, ke, ke});
  for (int64_t a = 0; a < o * i; ++a) {
    for (int64_t r = 0; r < k; ++r) {
      for (int64_t c = 0; c < k; ++c) out[(a * ke + r * dilation) * ke + c * dilation] = weight[(a * k + r) * k + c];
    }
  }
  return out;
}

template <typename T>
Tensor<T> center_pad_kernel(const Tensor<T>& weight, int extent) {
  const int64_t k = weight.dim(2);
  if (k == extent) return weight;
  if ((extent - k) % 2 != 0 || extent < k) {
    throw ShapeError("cannot centre a " + std::to_string(k) + "x" + std::to_string(k) + " kernel in extent " +
                     std::to_string(extent));
  }
  const int64_t off = (extent - k) / 2;
  const int64_t planes = weight.dim(0) * weight.dim(1);
  Tensor<T> out({weight.dim(0), weight.dim(1), extent, extent});
  for (int64_t p = 0; p < planes; ++p) {
    for (int64_t r = 0; r < k; ++r) {
      for (int64_t c = 0; c < k; ++c) out[(p * extent + r + off) * extent + c + off] = weight[(p * k + r) * k + c];
    }
  }
  return out;
}

template <typename T>
MergedKernel<T> drb_merge(const std::vector<DrbBranchWeights<T>>& branches) {
  if (branches.empty()) throw DomainError("branches", "at least one branch is required");
  const ConvSpec& first = branches.front().spec;
  int extent = 0;
  for (const auto& b : branches) {
    if (b.spec.in_channels != first.in_channels || b.spec.out_channels != first.out_channels ||
        b.spec.groups != first.groups) {
      throw ShapeError("reparam branches disagree on channels: " + std::to_string(b.spec.in_channels) + "->" +
                       std::to_string(b.spec.out_channels) + " vs " + std::to_string(first.in_channels) + "->" +
                       std::to_string(first.out_channels));
    }
    const int e = b.spec.equivalent_extent();
    if (e % 2 == 0) {
      throw DomainError("kernel", "equivalent extent " + std::to_string(e) + " is even (k=" +
                                      std::to_string(b.spec.kernel) + ", d=" + std::to_string(b.spec.dilation) + ")");
    }
    extent = std::max(extent, e);
  }
  MergedKernel<T> out;
  out.extent = extent;
  out.groups = first.groups;
  out.weight = Tensor<T>({first.out_channels, first.in_channels / first.groups, extent, extent});
  out.bias = Tensor<T>({first.out_channels});
  for (const auto& b : branches) {
    auto [w, bias] = fold_batch_norm(b.weight, b.gamma, b.beta, b.mean, b.var, b.eps);
    out.weight += center_pad_kernel(dilate_kernel(w, b.spec.dilation), extent);
    out.bias += bias;
  }
  return out;
}

template <typename T>
DilatedReparamConv<T>::DilatedReparamConv(int64_t channels, std::vector<DrbBranch> branches, int groups,
                                          InitRng& rng)
    : Layer<T>("DilatedReparamConv"), channels_(channels), groups_(groups), specs_(std::move(branches)) {
  if (specs_.empty()) throw DomainError("branches", "at least one branch is required");
  for (size_t i = 0; i < specs_.size(); ++i) {
    const DrbBranch& b = specs_[i];
    const int e = b.kernel + (b.kernel - 1) * (b.dilation - 1);
    if (e % 2 == 0) throw DomainError("kernel", "equivalent extent " + std::to_string(e) + " is even");
    extent_ = std::max(extent_, e);
    branches_.push_back(this->add_module(
        "branch" + std::to_string(i),
        std::make_shared<ConvBnAct<T>>(channels, channels, b.kernel, rng, 1, groups, Act::none, b.dilation)));
  }
}

template <typename T>
Var<T> DilatedReparamConv<T>::forward(const Var<T>& x) {
  if (mode_ == ReparamMode::deploy_merged) {
    return conv2d(x, Var<T>(merged_.weight), Var<T>(merged_.bias), {1, extent_ / 2, 1, groups_});
  }
  Var<T> y = branches_[0]->forward(x);
  for (size_t i = 1; i < branches_.size(); ++i) y = add(y, branches_[i]->forward(x));
  return y;
}

template <typename T>
void DilatedReparamConv<T>::switch_to_deploy() {
  std::vector<DrbBranchWeights<T>> ws;
  for (auto& b : branches_) {
    auto& bn = b->bn();
    ws.push_back({b->conv().spec(), b->conv().weight().value(), bn.weight().value(), bn.bias().value(),
                  bn.running_mean().value(), bn.running_var().value(), static_cast<T>(BatchNorm2d<T>::kEps)});
  }
  merged_ = drb_merge(ws);
  mode_ = ReparamMode::deploy_merged;
}

#define LITCHI_INSTANTIATE_DRB(T)                                                                            \
  template std::pair<Tensor<T>, Tensor<T>> fold_batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                                           const Tensor<T>&, const Tensor<T>&, T);            \
  template Tensor<T> dilate_kernel(const Tensor<T>&, int);                                                     \
  template Tensor<T> center_pad_kernel(const Tensor<T>&, int);                                                 \
  template MergedKernel<T> drb_merge(const std::vector<DrbBranchWeights<T>>&);                                 \
  template class DilatedReparamConv<T>;

LITCHI_INSTANTIATE_DRB(float)
LITCHI_INSTANTIATE_DRB(double)

}  // namespace litchi::nn
