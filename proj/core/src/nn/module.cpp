// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/module.hpp"

namespace litchi::nn {

namespace {
std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}
}  // namespace

template <typename T>
void Module<T>::train(bool on) {
  training_ = on;
  for (auto& [name, child] : children_) child->train(on);
  on_mode_change();
}

template <typename T>
void Module<T>::collect(std::vector<NamedVar<T>>& out, const std::string& prefix, bool buffers) const {
  for (const auto& p : buffers ? buffers_ : params_) out.push_back({join(prefix, p.name), p.var});
  for (const auto& [name, child] : children_) child->collect(out, join(prefix, name), buffers);
}

template <typename T>
std::vector<NamedVar<T>> Module<T>::named_parameters() const {
  std::vector<NamedVar<T>> out;
  collect(out, "", false);
  return out;
}

template <typename T>
std::vector<NamedVar<T>> Module<T>::named_buffers() const {
  std::vector<NamedVar<T>> out;
  collect(out, "", true);
  return out;
}

template <typename T>
std::vector<Var<T>> Module<T>::parameters() const {
  std::vector<Var<T>> out;
  for (auto& p : named_parameters()) out.push_back(p.var);
  return out;
}

template <typename T>
int64_t Module<T>::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : named_parameters()) n += p.var.value().numel();
  return n;
}

template <typename T>
void Module<T>::for_each_module(const std::function<void(const std::string&, const Module&)>& fn,
                                const std::string& prefix) const {
  fn(prefix, *this);
  for (const auto& [name, child] : children_) {
    static_cast<const Module&>(*child).for_each_module(fn, join(prefix, name));
  }
}

template <typename T>
void Module<T>::for_each_module(const std::function<void(const std::string&, Module&)>& fn,
                                const std::string& prefix) {
  fn(prefix, *this);
  for (auto& [name, child] : children_) child->for_each_module(fn, join(prefix, name));
}

template <typename T>
Var<T> Module<T>::add_parameter(const std::string& name, Tensor<T> init) {
  Var<T> v(std::move(init), true);
  params_.push_back({name, v});
  return v;
}

template <typename T>
Var<T> Module<T>::add_buffer(const std::string& name, Tensor<T> init) {
  Var<T> v(std::move(init), false);
  buffers_.push_back({name, v});
  return v;
}

template <typename T>
Var<T> Sequential<T>::forward(const Var<T>& x) {
  Var<T> y = x;
  for (auto& layer : layers_) y = layer->forward(y);
  return y;
}

template <typename T>
Tensor<T> uniform_tensor(Shape shape, T bound, InitRng& rng) {
  Tensor<T> t(std::move(shape));
  // Drawn in double so float and double models initialise identically.
  std::uniform_real_distribution<double> u(-static_cast<double>(bound), static_cast<double>(bound));
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

template class Module<float>;
template class Module<double>;
template class Sequential<float>;
template class Sequential<double>;
template Tensor<float> uniform_tensor(Shape, float, InitRng&);
template Tensor<double> uniform_tensor(Shape, double, InitRng&);

}  // namespace litchi::nn
