// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/yolo.hpp"

#include <cmath>

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
Bottleneck<T>::Bottleneck(int64_t c_in, int64_t c_out, bool shortcut, InitRng& rng, double expansion)
    : Layer<T>("Bottleneck"), add_(shortcut && c_in == c_out) {
  const auto hidden = static_cast<int64_t>(static_cast<double>(c_out) * expansion);
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c_in, hidden, 3, rng));
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>(hidden, c_out, 3, rng));
}

template <typename T>
Var<T> Bottleneck<T>::forward(const Var<T>& x) {
  Var<T> y = cv2_->forward(cv1_->forward(x));
  return add_ ? add(x, y) : y;
}

template <typename T>
C3k<T>::C3k(int64_t c_in, int64_t c_out, int n, bool shortcut, InitRng& rng, double expansion) : Layer<T>("C3k") {
  const auto hidden = static_cast<int64_t>(static_cast<double>(c_out) * expansion);
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c_in, hidden, 1, rng));
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>(c_in, hidden, 1, rng));
  m_ = this->add_module("m", std::make_shared<Sequential<T>>());
  for (int i = 0; i < n; ++i) m_->append(std::make_shared<Bottleneck<T>>(hidden, hidden, shortcut, rng, 1.0));
  cv3_ = this->add_module("cv3", std::make_shared<ConvBnAct<T>>(2 * hidden, c_out, 1, rng));
}

template <typename T>
Var<T> C3k<T>::forward(const Var<T>& x) {
  return cv3_->forward(concat<T>({m_->forward(cv1_->forward(x)), cv2_->forward(x)}, 1));
}

template <typename T>
C3k2<T>::C3k2(int64_t c_in, int64_t c_out, int n, bool c3k, InitRng& rng, double expansion, bool shortcut)
    : Layer<T>("C3k2"), hidden_(static_cast<int64_t>(static_cast<double>(c_out) * expansion)) {
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c_in, 2 * hidden_, 1, rng));
  for (int i = 0; i < n; ++i) {
    std::shared_ptr<Layer<T>> block;
    if (c3k) {
      block = std::make_shared<C3k<T>>(hidden_, hidden_, 2, shortcut, rng);
    } else {
      block = std::make_shared<Bottleneck<T>>(hidden_, hidden_, shortcut, rng);
    }
    m_.push_back(this->add_module("m" + std::to_string(i), block));
  }
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>((2 + n) * hidden_, c_out, 1, rng));
}

template <typename T>
Var<T> C3k2<T>::forward(const Var<T>& x) {
  std::vector<Var<T>> ys = split(cv1_->forward(x), 1, {hidden_, hidden_});
  for (auto& m : m_) ys.push_back(m->forward(ys.back()));
  return cv2_->forward(concat(ys, 1));
}

template <typename T>
Sppf<T>::Sppf(int64_t c_in, int64_t c_out, InitRng& rng, int kernel) : Layer<T>("Sppf"), kernel_(kernel) {
  const int64_t hidden = c_in / 2;
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c_in, hidden, 1, rng));
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>(4 * hidden, c_out, 1, rng));
}

template <typename T>
Var<T> Sppf<T>::forward(const Var<T>& x) {
  std::vector<Var<T>> ys{cv1_->forward(x)};
  for (int i = 0; i < 3; ++i) ys.push_back(max_pool2d(ys.back(), kernel_, 1, kernel_ / 2));
  return cv2_->forward(concat(ys, 1));
}

template <typename T>
PsaAttention<T>::PsaAttention(int64_t dim, int num_heads, InitRng& rng, double attn_ratio)
    : Layer<T>("PsaAttention"), dim_(dim), heads_(num_heads) {
  if (num_heads < 1 || dim % num_heads != 0) {
    throw ShapeError("attention dim " + std::to_string(dim) + " not divisible by heads " + std::to_string(num_heads));
  }
  head_dim_ = dim / num_heads;
  key_dim_ = static_cast<int64_t>(static_cast<double>(head_dim_) * attn_ratio);
  const int64_t qkv_ch = dim + 2 * key_dim_ * num_heads;
  qkv_ = this->add_module("qkv", std::make_shared<ConvBnAct<T>>(dim, qkv_ch, 1, rng, 1, 1, Act::none));
  proj_ = this->add_module("proj", std::make_shared<ConvBnAct<T>>(dim, dim, 1, rng, 1, 1, Act::none));
  pe_ = this->add_module("pe",
                         std::make_shared<ConvBnAct<T>>(dim, dim, 3, rng, 1, static_cast<int>(dim), Act::none));
}

template <typename T>
Var<T> PsaAttention<T>::forward(const Var<T>& x) {
  const int64_t b = x.dim(0), h = x.dim(2), w = x.dim(3), n = h * w;
  const Var<T> qkv = reshape(qkv_->forward(x), {b * heads_, 2 * key_dim_ + head_dim_, n});
  auto parts = split(qkv, 1, {key_dim_, key_dim_, head_dim_});
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(key_dim_)));
  // attn[i, j] = softmax_j(q_i . k_j); out = v attn^T.
  const Var<T> attn = softmax_last(mul_scalar(bmm(parts[0], parts[1], true, false), scale));
  const Var<T> out = reshape(bmm(parts[2], attn, false, true), {b, dim_, h, w});
  return proj_->forward(add(out, pe_->forward(reshape(parts[2], {b, dim_, h, w}))));
}

template <typename T>
PsaBlock<T>::PsaBlock(int64_t c, int num_heads, InitRng& rng) : Layer<T>("PsaBlock") {
  attn_ = this->add_module("attn", std::make_shared<PsaAttention<T>>(c, num_heads, rng));
  ffn1_ = this->add_module("ffn1", std::make_shared<ConvBnAct<T>>(c, 2 * c, 1, rng));
  ffn2_ = this->add_module("ffn2", std::make_shared<ConvBnAct<T>>(2 * c, c, 1, rng, 1, 1, Act::none));
}

template <typename T>
Var<T> PsaBlock<T>::forward(const Var<T>& x) {
  const Var<T> y = add(x, attn_->forward(x));
  return add(y, ffn2_->forward(ffn1_->forward(y)));
}

template <typename T>
C2Psa<T>::C2Psa(int64_t c, int n, InitRng& rng) : Layer<T>("C2Psa"), hidden_(c / 2) {
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c, 2 * hidden_, 1, rng));
  m_ = this->add_module("m", std::make_shared<Sequential<T>>());
  const int heads = std::max<int>(1, static_cast<int>(hidden_ / 64));
  for (int i = 0; i < n; ++i) m_->append(std::make_shared<PsaBlock<T>>(hidden_, heads, rng));
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>(2 * hidden_, c, 1, rng));
}

template <typename T>
Var<T> C2Psa<T>::forward(const Var<T>& x) {
  auto parts = split(cv1_->forward(x), 1, {hidden_, hidden_});
  return cv2_->forward(concat<T>({parts[0], m_->forward(parts[1])}, 1));
}

#define LITCHI_INSTANTIATE_YOLO(Cls) \
  template class Cls<float>;         \
  template class Cls<double>;
LITCHI_INSTANTIATE_YOLO(Bottleneck)
LITCHI_INSTANTIATE_YOLO(C3k)
LITCHI_INSTANTIATE_YOLO(C3k2)
LITCHI_INSTANTIATE_YOLO(Sppf)
LITCHI_INSTANTIATE_YOLO(PsaAttention)
LITCHI_INSTANTIATE_YOLO(PsaBlock)
LITCHI_INSTANTIATE_YOLO(C2Psa)

}  // namespace litchi::nn
