// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "litchi/detect/loss.hpp"
#include "litchi/detect/model.hpp"

namespace litchi::harness {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.937;
  double weight_decay = 0.0005;
  std::string optimizer = "SGD";
  int batch_size = 16;
  int epochs = 300;
  int workers = 4;
  int image_size = 1024;
  uint64_t seed = 0;

  bool nesterov = true;
  /// Linear ramp from zero over this many epochs; 0 disables it.
  double warmup_epochs = 3.0;
  /// Cosine decay to lr * final_lr_fraction after warmup; off keeps lr flat.
  bool cosine = true;
  double final_lr_fraction = 0.01;
  /// Multiplies the per-positive loss by the batch size before the update.
  bool scale_loss_by_batch = true;
  /// Gradient L2 norm cap per step; 0 disables clipping.
  double grad_clip_norm = 10.0;
  detect::LossWeights loss_weights;
  /// Single-threaded loading and a fixed reduction order.
  bool deterministic = true;
  /// Validation every N epochs (and after the last one); 0 disables it.
  int eval_interval = 1;
  double eval_conf = 0.001;
  double nms_iou = 0.7;

  /// Dataset root in the images/labels/split.json layout.
  std::string data;
  detect::ModelConfig model;

  /// Throws DomainError naming the first invalid field.
  void validate() const;
};

/// 50 epochs, batch 4, 256 px, for runs on a desk machine.
TrainConfig desk_profile();

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
TrainConfig read_train_config(const std::string& path, TrainConfig base = {});
void write_train_config(const TrainConfig& cfg, const std::string& path);

}  // namespace litchi::harness
