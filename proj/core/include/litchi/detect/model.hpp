// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "litchi/nn/f3.hpp"
#include "litchi/nn/head.hpp"
#include "litchi/nn/msr.hpp"

namespace litchi::detect {

struct ModelConfig {
  double width_multiple = 0.5;
  double depth_multiple = 0.5;
  int num_classes = 3;
  std::vector<int> strides{8, 16, 32};
  int input_size = 1024;
  bool use_c3msr = true;
  bool use_f3 = true;
  bool use_litchi_head = true;
  /// Channel cap before width scaling.
  int max_channels = 1024;
  /// Width of the weighted fusion neck before width scaling.
  int fusion_width = 192;
  double msr_expansion = 0.5;
  nn::MsrDilation msr_dilation = nn::MsrDilation::rates_123;
  bool seam_residual = true;

  /// Throws DomainError naming the offending field.
  void validate() const;
  /// Scaled channel count: ceil(min(c, max_channels) * width / 8) * 8.
  int64_t width(int64_t base) const;
  /// Scaled repeat count: max(1, round(n * depth)).
  int depth(int base) const;
  /// Short tag such as "A+B+C" or "baseline".
  std::string toggle_tag() const;
};

nlohmann::json to_json(const ModelConfig& cfg);
/// Unknown keys are rejected so typos surface as errors.
ModelConfig model_config_from_json(const nlohmann::json& j);
ModelConfig read_model_config(const std::string& path);
void write_model_config(const ModelConfig& cfg, const std::string& path);

/// Multi-scale feature maps, finest first.
template <typename T>
using Features = std::vector<nn::Var<T>>;

template <typename T>
class Backbone : public nn::Module<T> {
 public:
  Backbone(const ModelConfig& cfg, nn::InitRng& rng);
  /// Stride 8, 16 and 32 features.
  Features<T> forward(const nn::Var<T>& x);
  const std::vector<int64_t>& out_channels() const noexcept { return out_channels_; }

 private:
  std::vector<std::shared_ptr<nn::Layer<T>>> stages_;
  std::vector<int64_t> out_channels_;
};

template <typename T>
class Neck : public nn::Module<T> {
 public:
  using nn::Module<T>::Module;
  virtual Features<T> forward(const Features<T>& features) = 0;
  const std::vector<int64_t>& out_channels() const noexcept { return out_channels_; }

 protected:
  std::vector<int64_t> out_channels_;
};

/// Top-down then bottom-up path aggregation with C3k2 fusion blocks.
template <typename T>
class PanNeck : public Neck<T> {
 public:
  PanNeck(const ModelConfig& cfg, const std::vector<int64_t>& in_channels, nn::InitRng& rng);
  Features<T> forward(const Features<T>& features) override;

 private:
  std::shared_ptr<nn::Layer<T>> td4_, td3_, down3_, bu4_, down4_, bu5_;
};

/// Fast normalised weighted sum: relu(w_i) / (sum_j relu(w_j) + eps).
template <typename T>
class WeightedSum : public nn::Module<T> {
 public:
  explicit WeightedSum(int inputs);
  nn::Var<T> forward(const std::vector<nn::Var<T>>& xs);
  static constexpr double kEps = 1e-4;
  int inputs() const noexcept { return static_cast<int>(weight_.value().numel()); }

 private:
  nn::Var<T> weight_;
};

/// Bidirectional weighted fusion at a single width, F3 blocks at every node.
template <typename T>
class F3Neck : public Neck<T> {
 public:
  F3Neck(const ModelConfig& cfg, const std::vector<int64_t>& in_channels, nn::InitRng& rng);
  Features<T> forward(const Features<T>& features) override;

 private:
  std::vector<std::shared_ptr<nn::ConvBnAct<T>>> lateral_;
  std::shared_ptr<WeightedSum<T>> w_td4_, w_out3_, w_out4_, w_out5_;
  std::shared_ptr<nn::F3Block<T>> f_td4_, f_out3_, f_out4_, f_out5_;
  std::shared_ptr<nn::ConvBnAct<T>> down3_, down4_;
};

template <typename T>
class Detector : public nn::Module<T> {
 public:
  Detector(const ModelConfig& cfg, nn::InitRng& rng);
  /// images: (N, 3, H, W) with H and W multiples of the largest stride.
  std::vector<nn::HeadOutput<T>> forward(const nn::Var<T>& images);

  const ModelConfig& config() const noexcept { return cfg_; }
  Backbone<T>& backbone() { return *backbone_; }
  Neck<T>& neck() { return *neck_; }
  nn::DetectionHead<T>& head() { return *head_; }
  /// Box bias 1 and class bias log(5 / nc / cells) per scale.
  void init_head_priors();
  /// Merges every dilated reparam path for inference.
  void switch_to_deploy();

 private:
  ModelConfig cfg_;
  std::shared_ptr<Backbone<T>> backbone_;
  std::shared_ptr<Neck<T>> neck_;
  std::shared_ptr<nn::DetectionHead<T>> head_;
};

template <typename T>
std::shared_ptr<Detector<T>> build_model(const ModelConfig& cfg, uint64_t seed = 0);

extern template class Backbone<float>;
extern template class Backbone<double>;
extern template class Neck<float>;
extern template class Neck<double>;
extern template class PanNeck<float>;
extern template class PanNeck<double>;
extern template class WeightedSum<float>;
extern template class WeightedSum<double>;
extern template class F3Neck<float>;
extern template class F3Neck<double>;
extern template class Detector<float>;
extern template class Detector<double>;

}  // namespace litchi::detect
