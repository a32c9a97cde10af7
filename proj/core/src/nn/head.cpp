// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/nn/head.hpp"

#include <algorithm>

#include "litchi/error.hpp"

namespace litchi::nn {

template <typename T>
void DetectionHead<T>::check_scales(const std::vector<Var<T>>& features) const {
  if (features.size() != num_scales_) {
    throw ShapeError("head expects " + std::to_string(num_scales_) + " feature maps, got " +
                     std::to_string(features.size()));
  }
}

namespace {

template <typename T>
std::shared_ptr<Conv2d<T>> projection(int64_t c_in, int64_t c_out, InitRng& rng) {
  return std::make_shared<Conv2d<T>>(ConvSpec{c_in, c_out, 1, 1, 0, 1, 1, true}, rng);
}

}  // namespace

template <typename T>
YoloDetectHead<T>::YoloDetectHead(const std::vector<int64_t>& channels, int num_classes, InitRng& rng)
    : DetectionHead<T>("YoloDetectHead") {
  this->num_scales_ = channels.size();
  const int64_t c_box = std::max<int64_t>({16, channels.front() / 4, 64});
  const int64_t c_cls = std::max<int64_t>(channels.front(), std::min<int64_t>(num_classes, 100));
  for (size_t i = 0; i < channels.size(); ++i) {
    const int64_t c = channels[i];
    const std::string s = std::to_string(i);
    auto box = std::make_shared<Sequential<T>>();
    box->append(std::make_shared<ConvBnAct<T>>(c, c_box, 3, rng));
    box->append(std::make_shared<ConvBnAct<T>>(c_box, c_box, 3, rng));
    box_towers_.push_back(this->add_module("box" + s, box));
    box_out_.push_back(this->add_module("box_out" + s, projection<T>(c_box, 4, rng)));
    auto cls = std::make_shared<Sequential<T>>();
    cls->append(std::make_shared<ConvBnAct<T>>(c, c, 3, rng, 1, static_cast<int>(c)));
    cls->append(std::make_shared<ConvBnAct<T>>(c, c_cls, 1, rng));
    cls->append(std::make_shared<ConvBnAct<T>>(c_cls, c_cls, 3, rng, 1, static_cast<int>(c_cls)));
    cls->append(std::make_shared<ConvBnAct<T>>(c_cls, c_cls, 1, rng));
    cls_towers_.push_back(this->add_module("cls" + s, cls));
    cls_out_.push_back(this->add_module("cls_out" + s, projection<T>(c_cls, num_classes, rng)));
  }
}

template <typename T>
std::vector<HeadOutput<T>> YoloDetectHead<T>::forward(const std::vector<Var<T>>& features) {
  this->check_scales(features);
  std::vector<HeadOutput<T>> out;
  for (size_t i = 0; i < features.size(); ++i) {
    out.push_back({box_out_[i]->forward(box_towers_[i]->forward(features[i])),
                   cls_out_[i]->forward(cls_towers_[i]->forward(features[i]))});
  }
  return out;
}

template <typename T>
std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> YoloDetectHead<T>::output_convs() {
  std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> out;
  for (size_t i = 0; i < box_out_.size(); ++i) out.emplace_back(box_out_[i].get(), cls_out_[i].get());
  return out;
}

template <typename T>
LitchiHead<T>::LitchiHead(const std::vector<int64_t>& channels, int num_classes, InitRng& rng, int64_t hidden,
                          bool seam_residual)
    : DetectionHead<T>("LitchiHead"),
      hidden_(hidden > 0 ? hidden : std::max<int64_t>(channels.front(), std::min<int64_t>(num_classes, 100))) {
  this->num_scales_ = channels.size();
  for (size_t i = 0; i < channels.size(); ++i) {
    const std::string s = std::to_string(i);
    auto trunk = std::make_shared<Sequential<T>>();
    trunk->append(std::make_shared<DepthwiseSeparable<T>>(channels[i], hidden_, rng));
    trunk->append(std::make_shared<DepthwiseSeparable<T>>(hidden_, hidden_, rng));
    trunk->append(std::make_shared<ConvBnAct<T>>(hidden_, hidden_, 3, rng));
    trunk->append(std::make_shared<Seam<T>>(hidden_, rng, seam_residual));
    trunks_.push_back(this->add_module("trunk" + s, trunk));
    box_out_.push_back(this->add_module("box_out" + s, projection<T>(hidden_, 4, rng)));
    cls_out_.push_back(this->add_module("cls_out" + s, projection<T>(hidden_, num_classes, rng)));
  }
}

template <typename T>
std::vector<HeadOutput<T>> LitchiHead<T>::forward(const std::vector<Var<T>>& features) {
  this->check_scales(features);
  std::vector<HeadOutput<T>> out;
  for (size_t i = 0; i < features.size(); ++i) {
    const Var<T> shared = trunks_[i]->forward(features[i]);
    out.push_back({box_out_[i]->forward(shared), cls_out_[i]->forward(shared)});
  }
  return out;
}

template <typename T>
std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> LitchiHead<T>::output_convs() {
  std::vector<std::pair<Conv2d<T>*, Conv2d<T>*>> out;
  for (size_t i = 0; i < box_out_.size(); ++i) out.emplace_back(box_out_[i].get(), cls_out_[i].get());
  return out;
}

template class DetectionHead<float>;
template class DetectionHead<double>;
template class YoloDetectHead<float>;
template class YoloDetectHead<double>;
template class LitchiHead<float>;
template class LitchiHead<double>;

}  // namespace litchi::nn
