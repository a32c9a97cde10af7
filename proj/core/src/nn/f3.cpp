// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/f3.hpp"

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
PartialConv<T>::PartialConv(int64_t channels, InitRng& rng, int ratio_denominator)
    : Layer<T>("PartialConv"), channels_(channels) {
  if (channels < 1 || ratio_denominator < 1) throw ShapeError("partial conv needs at least one channel");
  conv_channels_ = (channels + ratio_denominator - 1) / ratio_denominator;
  conv_ = this->add_module(
      "conv", std::make_shared<Conv2d<T>>(ConvSpec{conv_channels_, conv_channels_, 3, 1, 1, 1, 1, false, false}, rng));
}

template <typename T>
Var<T> PartialConv<T>::forward(const Var<T>& x) {
  if (x.value().rank() != 4 || x.dim(1) != channels_) {
    throw ShapeError("partial conv expects " + std::to_string(channels_) + " channels, got " + shape_str(x.shape()));
  }
  if (conv_channels_ == channels_) return conv_->forward(x);
  auto parts = split(x, 1, {conv_channels_, channels_ - conv_channels_});
  return concat<T>({conv_->forward(parts[0]), parts[1]}, 1);
}

int ema_groups(int64_t channels, int preferred) {
  for (int g = preferred; g > 1; --g) {
    if (channels % g == 0) return g;
  }
  return 1;
}

template <typename T>
EmaAttention<T>::EmaAttention(int64_t channels, InitRng& rng, int groups)
    : Layer<T>("EmaAttention"), channels_(channels), groups_(groups) {
  if (groups < 1 || channels % groups != 0) {
    throw ShapeError("EMA channels " + std::to_string(channels) + " not divisible by groups " +
                     std::to_string(groups));
  }
  const int64_t cg = channels / groups;
  conv1x1_ = this->add_module("conv1x1", std::make_shared<Conv2d<T>>(ConvSpec{cg, cg, 1, 1, 0, 1, 1, true}, rng));
  conv3x3_ = this->add_module("conv3x3", std::make_shared<Conv2d<T>>(ConvSpec{cg, cg, 3, 1, 1, 1, 1, true}, rng));
  gn_ = this->add_module("gn", std::make_shared<GroupNorm<T>>(static_cast<int>(cg), cg));
}

template <typename T>
Var<T> EmaAttention<T>::gate_grouped(const Var<T>& gx) {
  const int64_t bg = gx.dim(0), cg = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  // Directional pools share one 1x1 conv by stacking along the height axis.
  const Var<T> pool_h = mean_dims(gx, {3});                          // (bg, cg, h, 1)
  const Var<T> pool_w = permute(mean_dims(gx, {2}), {0, 1, 3, 2});  // (bg, cg, w, 1)
  auto hw = split(conv1x1_->forward(concat<T>({pool_h, pool_w}, 2)), 2, {h, w});
  const Var<T> gate_h = sigmoid(hw[0]);
  const Var<T> gate_w = sigmoid(permute(hw[1], {0, 1, 3, 2}));
  const Var<T> x1 = gn_->forward(mul(mul(gx, gate_h), gate_w));
  const Var<T> x2 = conv3x3_->forward(gx);
  const Var<T> a1 = softmax_last(reshape(mean_dims(x1, {2, 3}), {bg, 1, cg}));
  const Var<T> a2 = softmax_last(reshape(mean_dims(x2, {2, 3}), {bg, 1, cg}));
  const Var<T> weights = add(bmm(a1, reshape(x2, {bg, cg, h * w})), bmm(a2, reshape(x1, {bg, cg, h * w})));
  return sigmoid(reshape(weights, {bg, 1, h, w}));
}

template <typename T>
Var<T> EmaAttention<T>::gate(const Var<T>& x) {
  if (x.value().rank() != 4 || x.dim(1) != channels_) {
    throw ShapeError("EMA expects " + std::to_string(channels_) + " channels, got " + shape_str(x.shape()));
  }
  return gate_grouped(reshape(x, {x.dim(0) * groups_, channels_ / groups_, x.dim(2), x.dim(3)}));
}

template <typename T>
Var<T> EmaAttention<T>::forward(const Var<T>& x) {
  if (x.value().rank() != 4 || x.dim(1) != channels_) {
    throw ShapeError("EMA expects " + std::to_string(channels_) + " channels, got " + shape_str(x.shape()));
  }
  const Var<T> gx = reshape(x, {x.dim(0) * groups_, channels_ / groups_, x.dim(2), x.dim(3)});
  return reshape(mul(gx, gate_grouped(gx)), x.shape());
}

template <typename T>
F3Block<T>::F3Block(int64_t c_in, int64_t c_out, InitRng& rng) : Layer<T>("F3Block"), c_out_(c_out) {
  stem_ = this->add_module("stem", std::make_shared<ConvBnAct<T>>(c_in, 2 * c_out, 3, rng));
  pconv_ = this->add_module("pconv", std::make_shared<PartialConv<T>>(c_out, rng));
  ema_ = this->add_module("ema", std::make_shared<EmaAttention<T>>(c_out, rng, ema_groups(c_out)));
}

template <typename T>
Var<T> F3Block<T>::forward(const Var<T>& x) {
  auto parts = split(stem_->forward(x), 1, {c_out_, c_out_});
  return add(parts[0], ema_->forward(pconv_->forward(parts[1])));
}

template class PartialConv<float>;
template class PartialConv<double>;
template class EmaAttention<float>;
template class EmaAttention<double>;
template class F3Block<float>;
template class F3Block<double>;

}  // namespace litchi::nn
