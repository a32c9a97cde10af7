// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "litchi/error.hpp"

namespace litchi::harness {

using nlohmann::json;

void TrainConfig::validate() const {
  const auto positive = [](const char* field, double v) {
    if (!(std::isfinite(v) && v > 0)) throw DomainError(field, "must be positive");
  };
  positive("lr", lr);
  if (!(momentum >= 0 && momentum < 1)) throw DomainError("momentum", "must lie in [0, 1)");
  if (!(std::isfinite(weight_decay) && weight_decay >= 0)) throw DomainError("weight_decay", "must be non-negative");
  if (optimizer != "SGD") throw DomainError("optimizer", "only SGD is supported, got " + optimizer);
  positive("batch_size", batch_size);
  positive("epochs", epochs);
  positive("workers", workers);
  positive("image_size", image_size);
  if (!(warmup_epochs >= 0)) throw DomainError("warmup_epochs", "must be non-negative");
  if (!(final_lr_fraction >= 0 && final_lr_fraction <= 1)) {
    throw DomainError("final_lr_fraction", "must lie in [0, 1]");
  }
  if (!(std::isfinite(grad_clip_norm) && grad_clip_norm >= 0)) {
    throw DomainError("grad_clip_norm", "must be non-negative");
  }
  positive("loss_weights.box", loss_weights.box);
  positive("loss_weights.cls", loss_weights.cls);
  if (eval_interval < 0) throw DomainError("eval_interval", "must be non-negative");
  if (!(eval_conf >= 0 && eval_conf < 1)) throw DomainError("eval_conf", "must lie in [0, 1)");
  if (!(nms_iou > 0 && nms_iou <= 1)) throw DomainError("nms_iou", "must lie in (0, 1]");
  model.validate();
  if (model.input_size != image_size) {
    throw DomainError("model.input_size", "must equal image_size (" + std::to_string(image_size) + ")");
  }
}

TrainConfig desk_profile() {
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 4;
  cfg.image_size = 256;
  cfg.workers = 1;
  cfg.model.input_size = 256;
  cfg.model.use_c3msr = cfg.model.use_f3 = cfg.model.use_litchi_head = true;
  return cfg;
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"optimizer", c.optimizer},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"workers", c.workers},
          {"image_size", c.image_size},
          {"seed", c.seed},
          {"nesterov", c.nesterov},
          {"warmup_epochs", c.warmup_epochs},
          {"cosine", c.cosine},
          {"final_lr_fraction", c.final_lr_fraction},
          {"scale_loss_by_batch", c.scale_loss_by_batch},
          {"grad_clip_norm", c.grad_clip_norm},
          {"loss_weights", {{"box", c.loss_weights.box}, {"cls", c.loss_weights.cls}}},
          {"deterministic", c.deterministic},
          {"eval_interval", c.eval_interval},
          {"eval_conf", c.eval_conf},
          {"nms_iou", c.nms_iou},
          {"data", c.data},
          {"model", detect::to_json(c.model)}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw DomainError("train config", "expected a JSON object");
  static const std::set<std::string> known{
      "lr",           "momentum",          "weight_decay",        "optimizer",     "batch_size", "epochs",
      "workers",      "image_size",        "seed",                "nesterov",      "warmup_epochs",
      "cosine",       "final_lr_fraction", "scale_loss_by_batch", "grad_clip_norm", "loss_weights",  "deterministic",
      "eval_interval", "eval_conf",        "nms_iou",             "data",          "model"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw DomainError(key, "unknown train config key");
  }
  try {
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("lr", c.lr);
    get("momentum", c.momentum);
    get("weight_decay", c.weight_decay);
    get("optimizer", c.optimizer);
    get("batch_size", c.batch_size);
    get("epochs", c.epochs);
    get("workers", c.workers);
    get("image_size", c.image_size);
    get("seed", c.seed);
    get("nesterov", c.nesterov);
    get("warmup_epochs", c.warmup_epochs);
    get("cosine", c.cosine);
    get("final_lr_fraction", c.final_lr_fraction);
    get("scale_loss_by_batch", c.scale_loss_by_batch);
    get("grad_clip_norm", c.grad_clip_norm);
    get("deterministic", c.deterministic);
    get("eval_interval", c.eval_interval);
    get("eval_conf", c.eval_conf);
    get("nms_iou", c.nms_iou);
    get("data", c.data);
    if (j.contains("loss_weights")) {
      const auto& w = j.at("loss_weights");
      for (const auto& [key, _] : w.items()) {
        if (key != "box" && key != "cls") throw DomainError("loss_weights." + key, "unknown key");
      }
      if (w.contains("box")) c.loss_weights.box = w.at("box").get<double>();
      if (w.contains("cls")) c.loss_weights.cls = w.at("cls").get<double>();
    }
  } catch (const json::exception& e) {
    throw DomainError("train config", e.what());
  }
  if (j.contains("model")) {
    json merged = detect::to_json(c.model);
    merged.merge_patch(j.at("model"));
    c.model = detect::model_config_from_json(merged);
  }
  if (j.contains("image_size") && !(j.contains("model") && j.at("model").contains("input_size"))) {
    c.model.input_size = c.image_size;
  }
  return c;
}

TrainConfig read_train_config(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open train config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path, e.what());
  }
  return train_config_from_json(j, std::move(base));
}

void write_train_config(const TrainConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << to_json(cfg).dump(2) << '\n';
}

}  // namespace litchi::harness
