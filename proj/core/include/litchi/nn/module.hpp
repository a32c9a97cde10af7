// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "litchi/nn/autograd.hpp"

namespace litchi::nn {

template <typename T>
struct NamedVar {
  std::string name;
  Var<T> var;
};

/// Deterministic source for weight initialisation.
using InitRng = std::mt19937_64;

/// Base for every layer and block. Parameters and buffers are held as graph
/// leaves so optimisers and checkpoints can update them in place through the
/// shared node; children are registered in construction order, which fixes
/// the hierarchical names.
template <typename T>
class Module {
 public:
  explicit Module(std::string type_name) : type_name_(std::move(type_name)) {}
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  const std::string& type_name() const noexcept { return type_name_; }

  void train(bool on = true);
  void eval() { train(false); }
  bool is_training() const noexcept { return training_; }

  std::vector<NamedVar<T>> named_parameters() const;
  std::vector<NamedVar<T>> named_buffers() const;
  std::vector<Var<T>> parameters() const;
  /// Exact element count over all parameters.
  int64_t parameter_count() const;

  /// Pre-order walk over this module and all descendants.
  void for_each_module(const std::function<void(const std::string&, const Module&)>& fn,
                       const std::string& prefix = "") const;
  void for_each_module(const std::function<void(const std::string&, Module&)>& fn, const std::string& prefix = "");

  const std::vector<std::pair<std::string, std::shared_ptr<Module>>>& children() const { return children_; }

 protected:
  Var<T> add_parameter(const std::string& name, Tensor<T> init);
  Var<T> add_buffer(const std::string& name, Tensor<T> init);
  template <typename M>
  std::shared_ptr<M> add_module(const std::string& name, std::shared_ptr<M> m) {
    children_.emplace_back(name, m);
    return m;
  }
  virtual void on_mode_change() {}

 private:
  void collect(std::vector<NamedVar<T>>& out, const std::string& prefix, bool buffers) const;

  std::string type_name_;
  bool training_ = true;
  std::vector<NamedVar<T>> params_;
  std::vector<NamedVar<T>> buffers_;
  std::vector<std::pair<std::string, std::shared_ptr<Module>>> children_;
};

/// Single-input, single-output module.
template <typename T>
class Layer : public Module<T> {
 public:
  using Module<T>::Module;
  virtual Var<T> forward(const Var<T>& x) = 0;
};

template <typename T>
class Sequential : public Layer<T> {
 public:
  Sequential() : Layer<T>("Sequential") {}
  void append(std::shared_ptr<Layer<T>> layer) {
    layers_.push_back(this->add_module(std::to_string(layers_.size()), std::move(layer)));
  }
  size_t size() const { return layers_.size(); }
  Var<T> forward(const Var<T>& x) override;

 private:
  std::vector<std::shared_ptr<Layer<T>>> layers_;
};

/// Uniform(-bound, bound) fill.
template <typename T>
Tensor<T> uniform_tensor(Shape shape, T bound, InitRng& rng);

extern template class Module<float>;
extern template class Module<double>;
extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace litchi::nn
