// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/layers.hpp"

#include <cmath>
#include <numeric>

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
Var<T> activate(const Var<T>& x, Act act) {
  switch (act) {
    case Act::silu:
      return silu(x);
    case Act::relu:
      return relu(x);
    case Act::gelu:
      return gelu(x);
    case Act::none:
      break;
  }
  return x;
}

template <typename T>
Conv2d<T>::Conv2d(const ConvSpec& spec, InitRng& rng) : Layer<T>("Conv2d"), spec_(spec) {
  if (spec.in_channels < 1 || spec.out_channels < 1 || spec.kernel < 1 || spec.groups < 1 ||
      spec.in_channels % spec.groups != 0 || spec.out_channels % spec.groups != 0) {
    throw ShapeError("invalid conv spec " + std::to_string(spec.in_channels) + "->" +
                     std::to_string(spec.out_channels) + " k" + std::to_string(spec.kernel) + " g" +
                     std::to_string(spec.groups));
  }
  const int64_t fan_in = spec.in_channels / spec.groups * spec.kernel * spec.kernel;
  const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(fan_in)));
  weight_ = this->add_parameter(
      "weight", uniform_tensor<T>({spec.out_channels, spec.in_channels / spec.groups, spec.kernel, spec.kernel},
                                  bound, rng));
  if (spec.bias) bias_ = this->add_parameter("bias", uniform_tensor<T>({spec.out_channels}, bound, rng));
}

template <typename T>
Var<T> Conv2d<T>::forward(const Var<T>& x) {
  if (x.value().rank() == 4) {
    last_hw_ = std::make_pair(x.dim(2), x.dim(3));
    last_batch_ = x.dim(0);
  }
  return conv2d(x, weight_, bias_, {spec_.stride, spec_.padding, spec_.dilation, spec_.groups});
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int64_t channels) : Layer<T>("BatchNorm2d"), channels_(channels) {
  weight_ = this->add_parameter("weight", Tensor<T>({channels}, T(1)));
  bias_ = this->add_parameter("bias", Tensor<T>({channels}, T(0)));
  running_mean_ = this->add_buffer("running_mean", Tensor<T>({channels}, T(0)));
  running_var_ = this->add_buffer("running_var", Tensor<T>({channels}, T(1)));
}

template <typename T>
Var<T> BatchNorm2d<T>::forward(const Var<T>& x) {
  if (this->is_training()) {
    return batch_norm_train(x, weight_, bias_, running_mean_.mutable_value(), running_var_.mutable_value(),
                            static_cast<T>(kMomentum), static_cast<T>(kEps));
  }
  return batch_norm_eval(x, weight_, bias_, running_mean_.value(), running_var_.value(), static_cast<T>(kEps));
}

template <typename T>
ConvBnAct<T>::ConvBnAct(int64_t c_in, int64_t c_out, int kernel, InitRng& rng, int stride, int groups, Act act,
                        int dilation)
    : Layer<T>("ConvBnAct"), act_(act) {
  ConvSpec spec{c_in, c_out, kernel, stride, same_padding(kernel, dilation), dilation, groups, false, true};
  conv_ = this->add_module("conv", std::make_shared<Conv2d<T>>(spec, rng));
  bn_ = this->add_module("bn", std::make_shared<BatchNorm2d<T>>(c_out));
}

template <typename T>
Var<T> ConvBnAct<T>::forward(const Var<T>& x) {
  return activate(bn_->forward(conv_->forward(x)), act_);
}

template <typename T>
DepthwiseSeparable<T>::DepthwiseSeparable(int64_t c_in, int64_t c_out, InitRng& rng, int kernel)
    : Layer<T>("DepthwiseSeparable") {
  dw_ = this->add_module("dw", std::make_shared<ConvBnAct<T>>(c_in, c_in, kernel, rng, 1, static_cast<int>(c_in)));
  pw_ = this->add_module("pw", std::make_shared<ConvBnAct<T>>(c_in, c_out, 1, rng));
}

template <typename T>
Var<T> DepthwiseSeparable<T>::forward(const Var<T>& x) {
  return pw_->forward(dw_->forward(x));
}

template <typename T>
Linear<T>::Linear(int64_t in_features, int64_t out_features, bool bias, InitRng& rng)
    : Layer<T>("Linear"), in_(in_features), out_(out_features) {
  const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(in_features)));
  weight_ = this->add_parameter("weight", uniform_tensor<T>({out_features, in_features}, bound, rng));
  if (bias) bias_ = this->add_parameter("bias", uniform_tensor<T>({out_features}, bound, rng));
}

template <typename T>
Var<T> Linear<T>::forward(const Var<T>& x) {
  return linear(x, weight_, bias_);
}

template <typename T>
GroupNorm<T>::GroupNorm(int groups, int64_t channels) : Layer<T>("GroupNorm"), groups_(groups), channels_(channels) {
  if (groups < 1 || channels % groups != 0) {
    throw ShapeError("group_norm channels " + std::to_string(channels) + " not divisible by " +
                     std::to_string(groups));
  }
  weight_ = this->add_parameter("weight", Tensor<T>({channels}, T(1)));
  bias_ = this->add_parameter("bias", Tensor<T>({channels}, T(0)));
}

template <typename T>
Var<T> GroupNorm<T>::forward(const Var<T>& x) {
  return group_norm(x, groups_, weight_, bias_, static_cast<T>(1e-5));
}

template Var<float> activate(const Var<float>&, Act);
template Var<double> activate(const Var<double>&, Act);

#define LITCHI_INSTANTIATE_LAYER(Cls) \
  template class Cls<float>;          \
  template class Cls<double>;
LITCHI_INSTANTIATE_LAYER(Conv2d)
LITCHI_INSTANTIATE_LAYER(BatchNorm2d)
LITCHI_INSTANTIATE_LAYER(ConvBnAct)
LITCHI_INSTANTIATE_LAYER(DepthwiseSeparable)
LITCHI_INSTANTIATE_LAYER(Linear)
LITCHI_INSTANTIATE_LAYER(GroupNorm)

}  // namespace litchi::nn
