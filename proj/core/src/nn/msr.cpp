// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/msr.hpp"

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
MsrBlock<T>::MsrBlock(int64_t channels, InitRng& rng, MsrDilation dilation) : Layer<T>("MsrBlock"), half_(channels / 2) {
  if (channels < 2 || channels % 2 != 0) {
    throw ShapeError("MSR block needs an even channel count, got " + std::to_string(channels));
  }
  const int h = static_cast<int>(half_);
  stem_ = this->add_module("stem", std::make_shared<ConvBnAct<T>>(half_, half_, 3, rng));
  d1_ = this->add_module("d1", std::make_shared<ConvBnAct<T>>(half_, half_, 3, rng, 1, h, Act::none));
  const bool eq = dilation == MsrDilation::rates_123;
  const std::vector<DrbBranch> p2 = eq ? std::vector<DrbBranch>{{3, 1}, {3, 2}} : std::vector<DrbBranch>{{3, 1}, {3, 3}};
  const std::vector<DrbBranch> p3 =
      eq ? std::vector<DrbBranch>{{5, 1}, {3, 2}, {3, 3}} : std::vector<DrbBranch>{{5, 1}, {3, 3}, {3, 5}};
  d2_ = this->add_module("d2", std::make_shared<DilatedReparamConv<T>>(half_, p2, h, rng));
  d3_ = this->add_module("d3", std::make_shared<DilatedReparamConv<T>>(half_, p3, h, rng));
  proj_ = this->add_module("proj", std::make_shared<ConvBnAct<T>>(3 * half_, half_, 1, rng, 1, 1, Act::none));
}

template <typename T>
Var<T> MsrBlock<T>::forward(const Var<T>& x) {
  if (x.value().rank() != 4 || x.dim(1) != 2 * half_) {
    throw ShapeError("MSR block expects " + std::to_string(2 * half_) + " channels, got " + shape_str(x.shape()));
  }
  auto parts = split(x, 1, {half_, half_});
  const Var<T> s = stem_->forward(parts[0]);
  const Var<T> f1 = silu(d1_->forward(s));
  const Var<T> f2 = silu(d2_->forward(s));
  const Var<T> f3 = silu(d3_->forward(s));
  const Var<T> fused = proj_->forward(concat<T>({f1, f2, f3}, 1));
  return concat<T>({parts[0], add(parts[1], fused)}, 1);
}

template <typename T>
void MsrBlock<T>::switch_to_deploy() {
  d2_->switch_to_deploy();
  d3_->switch_to_deploy();
}

template <typename T>
C3Msr<T>::C3Msr(int64_t c_in, int64_t c_out, int n_blocks, InitRng& rng, double expansion, MsrDilation dilation)
    : Layer<T>("C3Msr"), hidden_(static_cast<int64_t>(static_cast<double>(c_out) * expansion)) {
  if (n_blocks < 1) throw DomainError("n_blocks", "must be >= 1");
  if (hidden_ % 2 != 0) hidden_ += 1;
  cv1_ = this->add_module("cv1", std::make_shared<ConvBnAct<T>>(c_in, hidden_, 1, rng));
  cv2_ = this->add_module("cv2", std::make_shared<ConvBnAct<T>>(c_in, hidden_, 1, rng));
  for (int i = 0; i < n_blocks; ++i) {
    blocks_.push_back(this->add_module("m" + std::to_string(i), std::make_shared<MsrBlock<T>>(hidden_, rng, dilation)));
  }
  cv3_ = this->add_module("cv3", std::make_shared<ConvBnAct<T>>(2 * hidden_, c_out, 1, rng));
}

template <typename T>
Var<T> C3Msr<T>::forward(const Var<T>& x) {
  Var<T> a = cv1_->forward(x);
  for (auto& b : blocks_) a = b->forward(a);
  return cv3_->forward(concat<T>({a, cv2_->forward(x)}, 1));
}

template <typename T>
void C3Msr<T>::switch_to_deploy() {
  for (auto& b : blocks_) b->switch_to_deploy();
}

template class MsrBlock<float>;
template class MsrBlock<double>;
template class C3Msr<float>;
template class C3Msr<double>;

}  // namespace litchi::nn
