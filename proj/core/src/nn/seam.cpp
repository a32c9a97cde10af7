// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/seam.hpp"

#include <algorithm>

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
Csmm<T>::Csmm(int64_t channels, int patch, InitRng& rng) : Layer<T>("Csmm"), channels_(channels), patch_(patch) {
  if (patch < 1) throw DomainError("patch", "must be >= 1");
  const int g = static_cast<int>(channels);
  embed_ = this->add_module(
      "embed", std::make_shared<Conv2d<T>>(ConvSpec{channels, channels, patch, patch, 0, 1, g, true}, rng));
  bn_embed_ = this->add_module("bn_embed", std::make_shared<BatchNorm2d<T>>(channels));
  dw_ = this->add_module("dw", std::make_shared<Conv2d<T>>(ConvSpec{channels, channels, 3, 1, 1, 1, g, true}, rng));
  bn_dw_ = this->add_module("bn_dw", std::make_shared<BatchNorm2d<T>>(channels));
  pw_ = this->add_module("pw", std::make_shared<Conv2d<T>>(ConvSpec{channels, channels, 1, 1, 0, 1, 1, true}, rng));
  bn_pw_ = this->add_module("bn_pw", std::make_shared<BatchNorm2d<T>>(channels));
}

template <typename T>
Var<T> Csmm<T>::forward(const Var<T>& x) {
  if (x.value().rank() != 4 || x.dim(1) != channels_) {
    throw ShapeError("CSMM expects " + std::to_string(channels_) + " channels, got " + shape_str(x.shape()));
  }
  const int64_t h = x.dim(2), w = x.dim(3);
  const int64_t ph = (h + patch_ - 1) / patch_ * patch_, pw = (w + patch_ - 1) / patch_ * patch_;
  Var<T> y = (ph == h && pw == w) ? x : pad2d(x, 0, ph - h, 0, pw - w);
  y = bn_embed_->forward(gelu(embed_->forward(y)));
  y = add(y, bn_dw_->forward(gelu(dw_->forward(y))));
  y = bn_pw_->forward(gelu(pw_->forward(y)));
  y = upsample_nearest(y, patch_);
  if (ph != h) y = slice(y, 2, 0, h);
  if (pw != w) y = slice(y, 3, 0, w);
  return y;
}

template <typename T>
Seam<T>::Seam(int64_t channels, InitRng& rng, bool residual, int reduction)
    : Layer<T>("Seam"), channels_(channels), residual_(residual) {
  for (int p : {6, 7, 8}) {
    branches_.push_back(this->add_module("csmm" + std::to_string(p), std::make_shared<Csmm<T>>(channels, p, rng)));
  }
  merge_ = this->add_module(
      "merge", std::make_shared<Conv2d<T>>(ConvSpec{3 * channels, channels, 1, 1, 0, 1, 1, true}, rng));
  const int64_t hidden = std::max<int64_t>(1, channels / reduction);
  fc1_ = this->add_module("fc1", std::make_shared<Linear<T>>(channels, hidden, false, rng));
  fc2_ = this->add_module("fc2", std::make_shared<Linear<T>>(hidden, channels, false, rng));
}

template <typename T>
Var<T> Seam<T>::attention(const Var<T>& x) {
  std::vector<Var<T>> outs;
  for (auto& b : branches_) outs.push_back(b->forward(x));
  const Var<T> merged = merge_->forward(concat(outs, 1));
  const Var<T> pooled = reshape(mean_dims(merged, {2, 3}), {x.dim(0), channels_});
  const Var<T> z = fc2_->forward(relu(fc1_->forward(pooled)));
  return exp(sigmoid(z));
}

template <typename T>
Var<T> Seam<T>::forward(const Var<T>& x) {
  const Var<T> a = reshape(attention(x), {x.dim(0), channels_, 1, 1});
  const Var<T> weighted = mul(x, a);
  return residual_ ? add(x, weighted) : weighted;
}

template class Csmm<float>;
template class Csmm<double>;
template class Seam<float>;
template class Seam<double>;

}  // namespace litchi::nn
