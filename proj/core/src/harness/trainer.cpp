// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "litchi/detect/assign.hpp"
#include "litchi/error.hpp"
#include "litchi/harness/checkpoint.hpp"
#include "litchi/harness/optim.hpp"
#include "litchi/metrics/profile.hpp"

#ifndef LITCHI_GIT_DESCRIBE
#define LITCHI_GIT_DESCRIBE "unknown"
#endif

namespace litchi::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
}

std::vector<std::string> class_names() {
  std::vector<std::string> names;
  for (auto n : data::kOcclusionNames) names.emplace_back(n);
  return names;
}

}  // namespace

TrainData load_train_data(const std::string& root) {
  TrainData d;
  auto files = data::subset_files(root, data::Subset::train);
  if (files.empty()) throw DomainError("data", "train split of " + root + " is empty");
  d.train_size = files.size();
  d.train = [files](size_t i) { return data::load_sample(files.at(i)); };
  d.validation = data::load_subset(root, data::Subset::val);
  if (d.validation.empty()) {
    d.validation = data::load_subset(root, data::Subset::train);
    d.validation_subset = "train";
  }
  return d;
}

TrainData in_memory_data(std::vector<data::Sample> samples) {
  if (samples.empty()) throw DomainError("data", "no training samples");
  TrainData d;
  d.train_size = samples.size();
  auto shared = std::make_shared<const std::vector<data::Sample>>(samples);
  d.train = [shared](size_t i) { return shared->at(i); };
  d.validation = std::move(samples);
  d.validation_subset = "train";
  return d;
}

std::vector<std::vector<detect::Detection>> predict(detect::Detector<float>& model,
                                                    const std::vector<data::Sample>& samples, int image_size,
                                                    double conf, double nms_iou, int batch_size) {
  const bool was_training = model.is_training();
  model.eval();
  nn::NoGradGuard no_grad;
  std::vector<std::vector<detect::Detection>> out;
  detect::DecodeOptions opts;
  opts.conf_threshold = conf;
  for (size_t begin = 0; begin < samples.size(); begin += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(samples.size(), begin + static_cast<size_t>(batch_size));
    const std::vector<data::Sample> chunk(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                          samples.begin() + static_cast<std::ptrdiff_t>(end));
    const Batch b = make_batch(chunk, image_size);
    const auto outputs = model.forward(nn::Var<float>(b.images));
    for (auto& dets : detect::decode(outputs, model.config().strides, image_size, image_size, opts)) {
      out.push_back(detect::nms(dets, conf, nms_iou));
    }
  }
  model.train(was_training);
  return out;
}

std::vector<std::vector<metrics::GroundTruth>> ground_truth(const std::vector<data::Sample>& samples,
                                                            int image_size) {
  std::vector<std::vector<metrics::GroundTruth>> gts;
  for (const auto& s : samples) {
    auto& img = gts.emplace_back();
    for (const auto& a : s.record.annotations) {
      img.push_back({detect::box_from_annotation(a, image_size, image_size), a.class_id});
    }
  }
  return gts;
}

metrics::MetricsReport evaluate_samples(detect::Detector<float>& model, const std::vector<data::Sample>& samples,
                                        int image_size, double conf, double nms_iou,
                                        const metrics::EvalOptions& options) {
  const auto dets = predict(model, samples, image_size, conf, nms_iou);
  const auto result = metrics::evaluate_detections(dets, ground_truth(samples, image_size), options);
  auto report = metrics::make_report(result, class_names(), options);
  report.params_m = static_cast<double>(metrics::count_params(model)) / 1e6;
  report.gflops = metrics::count_gflops(model, image_size);
  return report;
}

json predictions_to_json(const std::vector<data::Sample>& samples,
                         const std::vector<std::vector<detect::Detection>>& dets) {
  json out = json::array();
  for (size_t i = 0; i < samples.size(); ++i) {
    json list = json::array();
    for (const auto& d : dets.at(i)) {
      list.push_back({{"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}, {"score", d.score}, {"class", d.class_id}});
    }
    out.push_back({{"image_id", samples[i].record.image_id}, {"detections", list}});
  }
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_map50\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& r : history) {
    out << r.epoch << ',' << r.train_loss << ',';
    if (r.val_map50) out << *r.val_map50;
    out << '\n';
  }
  return out.str();
}

std::string git_describe() { return LITCHI_GIT_DESCRIBE; }

json run_info(const TrainConfig& cfg, const TrainResult* result) {
  json j{{"config", to_json(cfg)},
         {"seed", cfg.seed},
         {"git_describe", git_describe()},
         {"hardware", metrics::hardware_string()},
         {"lr_schedule",
          {{"warmup_epochs", cfg.warmup_epochs},
           {"cosine", cfg.cosine},
           {"final_lr_fraction", cfg.final_lr_fraction}}}};
  if (result) {
    j["validation_subset"] = result->validation_subset;
    j["first_batch_hash"] = result->first_batch_hash;
    j["best_val_map50"] = result->best_val_map50;
    j["seconds"] = result->seconds;
    j["epochs_run"] = result->history.size();
  }
  return j;
}

TrainResult train(detect::Detector<float>& model, const TrainData& data, const TrainConfig& cfg,
                  const std::string& out_dir, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train_size == 0) throw DomainError("data", "train split is empty");
  if (model.config().input_size != cfg.image_size) {
    throw DomainError("model.input_size", "does not match image_size");
  }
  const auto start = std::chrono::steady_clock::now();
  const fs::path out(out_dir);
  if (!out_dir.empty()) fs::create_directories(out);

  const auto& strides = model.config().strides;
  const int64_t steps_per_epoch =
      static_cast<int64_t>((data.train_size + static_cast<size_t>(cfg.batch_size) - 1) / cfg.batch_size);
  LrSchedule schedule{cfg.lr, static_cast<int64_t>(std::llround(cfg.warmup_epochs * steps_per_epoch)),
                      steps_per_epoch * cfg.epochs, cfg.cosine, cfg.final_lr_fraction};
  Sgd<float> opt(model.parameters(), cfg.momentum, cfg.weight_decay, cfg.nesterov);
  const int workers = cfg.deterministic ? 1 : cfg.workers;

  TrainResult result;
  result.validation_subset = data.validation_subset;
  int64_t step = 0;
  model.train();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    BatchLoader loader(data.train, epoch_order(data.train_size, cfg.seed, epoch), cfg.batch_size, cfg.image_size,
                       workers);
    double loss_sum = 0;
    int batches = 0;
    double lr = 0;
    while (auto batch = loader.next()) {
      if (epoch == 1 && batch->index == 0) result.first_batch_hash = batch_hash(*batch);
      const auto n = batch->images.shape()[0];
      if (n < 2) continue;  // batch statistics need more than one image
      lr = schedule.at(step++);
      const auto outputs = model.forward(nn::Var<float>(batch->images));
      const auto targets = detect::assign_targets(batch->targets, cfg.image_size, cfg.image_size, strides);
      detect::LossBreakdown<float> loss;
      try {
        loss = detect::compute_loss(outputs, targets, strides, cfg.loss_weights);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(batch->index) + ": " +
                           e.what());
      }
      nn::Var<float> objective =
          cfg.scale_loss_by_batch ? nn::mul_scalar(loss.total, static_cast<float>(n)) : loss.total;
      opt.zero_grad();
      objective.backward();
      if (cfg.grad_clip_norm > 0) opt.clip_grad_norm(cfg.grad_clip_norm);
      opt.step(lr);
      loss_sum += loss.total_value();
      ++batches;
    }
    EpochRecord rec{epoch, batches > 0 ? loss_sum / batches : 0.0, std::nullopt, lr};
    const bool evaluate_now =
        cfg.eval_interval > 0 && (epoch % cfg.eval_interval == 0 || epoch == cfg.epochs) && !data.validation.empty();
    if (evaluate_now) {
      const auto dets = predict(model, data.validation, cfg.image_size, cfg.eval_conf, cfg.nms_iou);
      const auto res = metrics::evaluate_detections(dets, ground_truth(data.validation, cfg.image_size),
                                                    {model.config().num_classes, 0.5, 0.25});
      rec.val_map50 = res.map50;
      if (res.map50 > result.best_val_map50) {
        result.best_val_map50 = res.map50;
        if (!out_dir.empty()) {
          save_checkpoint(model, (out / "best.ckpt").string(), {{"epoch", epoch}, {"val_map50", res.map50}});
          result.best_checkpoint = (out / "best.ckpt").string();
        }
      }
    }
    result.history.push_back(rec);
    if (!out_dir.empty()) write_text(out / "history.csv", history_csv(result.history));
    if (on_epoch) on_epoch(rec);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out_dir.empty()) {
    save_checkpoint(model, (out / "last.ckpt").string(), {{"epoch", cfg.epochs}});
    if (result.best_checkpoint.empty()) result.best_checkpoint = (out / "last.ckpt").string();
    write_text(out / "manifest.json", model_manifest(model).dump(2) + "\n");
    write_text(out / "run.json", run_info(cfg, &result).dump(2) + "\n");
  }
  return result;
}

metrics::MetricsReport evaluate_checkpoint(const std::string& checkpoint, const std::string& data_root,
                                           data::Subset subset, const std::string& out_dir, double conf,
                                           double nms_iou) {
  auto loaded = load_checkpoint<float>(checkpoint);
  auto& model = *loaded.model;
  const int size = model.config().input_size;
  const auto samples = data::load_subset(data_root, subset);
  const metrics::EvalOptions options{model.config().num_classes, 0.5, 0.25};
  const auto dets = predict(model, samples, size, conf, nms_iou);
  const auto result = metrics::evaluate_detections(dets, ground_truth(samples, size), options);
  auto report = metrics::make_report(result, class_names(), options);
  report.params_m = static_cast<double>(metrics::count_params(model)) / 1e6;
  report.gflops = metrics::count_gflops(model, size);
  if (!out_dir.empty()) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    metrics::write_report(report, (out / "report.json").string());
    write_text(out / "per_class_ap.csv", metrics::per_class_ap_csv(report));
    write_text(out / "occlusion.csv", metrics::occlusion_csv(report));
    data::write_image(metrics::plot_pr_curves(result.curves50), (out / "pr_curves.png").string());
    write_text(out / "predictions.json", predictions_to_json(samples, dets).dump(1) + "\n");
  }
  return report;
}

}  // namespace litchi::harness
