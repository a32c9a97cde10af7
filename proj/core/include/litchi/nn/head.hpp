// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/nn/seam.hpp"

namespace litchi::nn {

/// Raw per-scale predictions: box_map (N, 4, H, W) side-distance logits and
/// cls_map (N, classes, H, W) class logits.
template <typename T>
struct HeadOutput {
  Var<T> box;
  Var<T> cls;
};

template <typename T>
class DetectionHead : public Module<T> {
 public:
  using Module<T>::Module;
  virtual std::vector<HeadOutput<T>> forward(const std::vector<Var<T>>& features) = 0;
  /// Final 1x1 projections per scale, exposed for prior initialisation.
  virtual std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> output_convs() = 0;
  size_t num_scales() const noexcept { return num_scales_; }

 protected:
  void check_scales(const std::vector<Var<T>>& features) const;
  size_t num_scales_ = 0;
};

/// Decoupled baseline head: separate box and class towers per scale.
template <typename T>
class YoloDetectHead : public DetectionHead<T> {
 public:
  YoloDetectHead(const std::vector<int64_t>& channels, int num_classes, InitRng& rng);
  std::vector<HeadOutput<T>> forward(const std::vector<Var<T>>& features) override;
  std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> output_convs() override;

 private:
  std::vector<std::shared_ptr<Sequential<T>>> box_towers_, cls_towers_;
  std::vector<std::shared_ptr<Conv2d<T>>> box_out_, cls_out_;
};

/// Single shared trunk per scale (DWConv, DWConv, 3x3 conv, SEAM) feeding
/// both the box and the class projection.
template <typename T>
class LitchiHead : public DetectionHead<T> {
 public:
  LitchiHead(const std::vector<int64_t>& channels, int num_classes, InitRng& rng, int64_t hidden = 0,
             bool seam_residual = true);
  std::vector<HeadOutput<T>> forward(const std::vector<Var<T>>& features) override;
  std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> output_convs() override;

  int64_t hidden() const noexcept { return hidden_; }
  Sequential<T>& trunk(size_t scale) { return *trunks_.at(scale); }

 private:
  int64_t hidden_;
  std::vector<std::shared_ptr<Sequential<T>>> trunks_;
  std::vector<std::shared_ptr<Conv2d<T>>> box_out_, cls_out_;
};

extern template class DetectionHead<float>;
extern template class DetectionHead<double>;
extern template class YoloDetectHead<float>;
extern template class YoloDetectHead<double>;
extern template class LitchiHead<float>;
extern template class LitchiHead<double>;

}  // namespace litchi::nn
