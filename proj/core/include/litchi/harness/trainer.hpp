// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litchi/detect/boxes.hpp"
#include "litchi/harness/config.hpp"
#include "litchi/harness/loader.hpp"
#include "litchi/metrics/report.hpp"

namespace litchi::harness {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  std::optional<double> val_map50;
  double lr = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  /// Empty when no output directory was given.
  std::string best_checkpoint;
  double best_val_map50 = -1;
  uint64_t first_batch_hash = 0;
  /// "val", or "train" when the validation split is empty.
  std::string validation_subset;
  double seconds = 0;
};

struct TrainData {
  SampleSource train;
  size_t train_size = 0;
  /// Samples scored after each evaluation interval.
  std::vector<data::Sample> validation;
  std::string validation_subset = "val";
};

/// Train subset from disk, validation from the val subset or, when that is
/// empty, from the train subset itself.
TrainData load_train_data(const std::string& root);

/// In-memory training set that is also used for validation.
TrainData in_memory_data(std::vector<data::Sample> samples);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Writes history.csv, best.ckpt, last.ckpt, manifest.json and run.json under
/// out_dir when it is non-empty. Throws NumericError naming the epoch and
/// batch when the loss is not finite.
TrainResult train(detect::Detector<float>& model, const TrainData& data, const TrainConfig& cfg,
                  const std::string& out_dir = "", const EpochCallback& on_epoch = {});

/// Decoded and suppressed detections in pixel coordinates of the resized
/// image_size x image_size input.
std::vector<std::vector<detect::Detection>> predict(detect::Detector<float>& model,
                                                    const std::vector<data::Sample>& samples, int image_size,
                                                    double conf, double nms_iou, int batch_size = 8);

std::vector<std::vector<metrics::GroundTruth>> ground_truth(const std::vector<data::Sample>& samples, int image_size);

/// Accuracy metrics plus params and GFLOPs; fps is left at zero.
metrics::MetricsReport evaluate_samples(detect::Detector<float>& model, const std::vector<data::Sample>& samples,
                                        int image_size, double conf, double nms_iou,
                                        const metrics::EvalOptions& options = {});

nlohmann::json predictions_to_json(const std::vector<data::Sample>& samples,
                                   const std::vector<std::vector<detect::Detection>>& dets);

/// Loads a checkpoint, scores one subset of a dataset and writes report.json,
/// per_class_ap.csv, occlusion.csv, pr_curves.png and predictions.json.
metrics::MetricsReport evaluate_checkpoint(const std::string& checkpoint, const std::string& data_root,
                                           data::Subset subset, const std::string& out_dir, double conf = 0.001,
                                           double nms_iou = 0.7);

/// History CSV with header epoch,train_loss,val_map50.
std::string history_csv(const std::vector<EpochRecord>& history);

/// `git describe --always --dirty` of the build tree, or "unknown".
std::string git_describe();

nlohmann::json run_info(const TrainConfig& cfg, const TrainResult* result = nullptr);

}  // namespace litchi::harness
