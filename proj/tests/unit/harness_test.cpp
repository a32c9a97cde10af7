// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litchi/data/dataset.hpp"
#include "litchi/data/synth.hpp"
#include "litchi/error.hpp"
#include "litchi/harness/ablation.hpp"
#include "litchi/harness/checkpoint.hpp"
#include "litchi/harness/config.hpp"
#include "litchi/harness/loader.hpp"
#include "litchi/harness/optim.hpp"
#include "litchi/harness/trainer.hpp"
#include "litchi/metrics/profile.hpp"

namespace data = litchi::data;
namespace detect = litchi::detect;
namespace h = litchi::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("litchi_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<data::Sample> tiny_samples(int count = 16) {
  data::SynthConfig cfg;
  cfg.image_size = 64;
  cfg.image_count = count;
  cfg.fruit_count = {1, 3};
  cfg.fruit_radius_px = {5, 9};
  cfg.rng_seed = 21;
  std::vector<data::Sample> out;
  for (auto& s : data::generate_synthetic(cfg)) out.push_back({s.record, s.image});
  return out;
}

h::TrainConfig tiny_config(int epochs) {
  h::TrainConfig cfg;
  cfg.image_size = 64;
  cfg.batch_size = 4;
  cfg.epochs = epochs;
  cfg.workers = 1;
  cfg.warmup_epochs = 0;
  cfg.seed = 5;
  cfg.eval_interval = 0;
  cfg.model.width_multiple = 0.125;
  cfg.model.depth_multiple = 0.34;
  cfg.model.input_size = 64;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(TrainConfig, DefaultsMatchReferenceHyperparameters) {
  const h::TrainConfig cfg;
  EXPECT_EQ(cfg.lr, 0.01);
  EXPECT_EQ(cfg.momentum, 0.937);
  EXPECT_EQ(cfg.weight_decay, 0.0005);
  EXPECT_EQ(cfg.optimizer, "SGD");
  EXPECT_EQ(cfg.batch_size, 16);
  EXPECT_EQ(cfg.epochs, 300);
  EXPECT_EQ(cfg.workers, 4);
  EXPECT_EQ(cfg.image_size, 1024);
  cfg.validate();
}

TEST(TrainConfig, DeskProfile) {
  const auto cfg = h::desk_profile();
  EXPECT_EQ(cfg.epochs, 50);
  EXPECT_EQ(cfg.batch_size, 4);
  EXPECT_EQ(cfg.image_size, 256);
  EXPECT_TRUE(cfg.model.use_c3msr && cfg.model.use_f3 && cfg.model.use_litchi_head);
  cfg.validate();
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  auto cfg = tiny_config(3);
  cfg.data = "somewhere";
  EXPECT_EQ(h::to_json(h::train_config_from_json(h::to_json(cfg))), h::to_json(cfg));
  EXPECT_THROW(h::train_config_from_json({{"learning_rate", 0.1}}), litchi::DomainError);
  const auto patched = h::train_config_from_json({{"epochs", 7}, {"model", {{"use_f3", false}}}}, cfg);
  EXPECT_EQ(patched.epochs, 7);
  EXPECT_FALSE(patched.model.use_f3);
  EXPECT_EQ(patched.model.width_multiple, 0.125);
  auto bad = cfg;
  bad.lr = -1;
  EXPECT_THROW(bad.validate(), litchi::DomainError);
  bad = cfg;
  bad.image_size = 128;
  EXPECT_THROW(bad.validate(), litchi::DomainError);
}

TEST(LrSchedule, WarmupThenCosine) {
  const h::LrSchedule s{0.01, 4, 104, true, 0.01};
  EXPECT_DOUBLE_EQ(s.at(0), 0.01 / 5);
  EXPECT_DOUBLE_EQ(s.at(3), 0.01 * 4 / 5);
  EXPECT_DOUBLE_EQ(s.at(4), 0.01);
  EXPECT_NEAR(s.at(54), 0.0001 + 0.5 * (0.01 - 0.0001), 1e-15);
  EXPECT_NEAR(s.at(104), 0.0001, 1e-15);
  for (int64_t k = 5; k < 104; ++k) EXPECT_LE(s.at(k), s.at(k - 1));
  EXPECT_EQ((h::LrSchedule{0.02, 0, 10, false, 0.01}.at(7)), 0.02);
}

TEST(Sgd, NesterovStepMatchesHandComputation) {
  // w = [1, 2] (2x1 so weight decay applies), b = [3] (rank 1, no decay).
  litchi::nn::Var<double> w(litchi::nn::Tensor<double>({2, 1}, {1.0, 2.0}), true);
  litchi::nn::Var<double> b(litchi::nn::Tensor<double>({1}, {3.0}), true);
  h::Sgd<double> opt({w, b}, 0.9, 0.1, true);
  EXPECT_EQ(opt.num_decayed(), 1u);
  w.mutable_grad() = litchi::nn::Tensor<double>({2, 1}, {0.5, -1.0});
  b.mutable_grad() = litchi::nn::Tensor<double>({1}, {2.0});
  opt.step(0.1);
  // d = g + 0.1 w; v = d; w -= lr (d + 0.9 v) = lr * 1.9 d.
  EXPECT_NEAR(w.value().data()[0], 1.0 - 0.1 * 1.9 * 0.6, 1e-15);
  EXPECT_NEAR(w.value().data()[1], 2.0 - 0.1 * 1.9 * -0.8, 1e-15);
  EXPECT_NEAR(b.value().data()[0], 3.0 - 0.1 * 1.9 * 2.0, 1e-15);
  // Second step with the same gradient on b: v = 0.9 * 2 + 2 = 3.8.
  opt.step(0.1);
  EXPECT_NEAR(b.value().data()[0], 3.0 - 0.38 - 0.1 * (2.0 + 0.9 * 3.8), 1e-14);
}

TEST(Sgd, ClipGradNormRescales) {
  litchi::nn::Var<double> p(litchi::nn::Tensor<double>({2}, {0.0, 0.0}), true);
  h::Sgd<double> opt({p}, 0.0, 0.0, false);
  p.mutable_grad() = litchi::nn::Tensor<double>({2}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(opt.clip_grad_norm(1.0), 5.0);
  EXPECT_NEAR(p.grad().data()[0], 0.6, 1e-15);
  EXPECT_NEAR(p.grad().data()[1], 0.8, 1e-15);
  EXPECT_NEAR(opt.clip_grad_norm(10.0), 1.0, 1e-15);
  EXPECT_NEAR(p.grad().data()[1], 0.8, 1e-15);
}

TEST(Loader, EpochOrderIsSeededPermutation) {
  const auto a = h::epoch_order(50, 3, 0);
  EXPECT_EQ(a, h::epoch_order(50, 3, 0));
  EXPECT_NE(a, h::epoch_order(50, 3, 1));
  EXPECT_NE(a, h::epoch_order(50, 4, 0));
  EXPECT_EQ(std::set<size_t>(a.begin(), a.end()).size(), 50u);
  const auto plain = h::epoch_order(5, 3, 0, false);
  EXPECT_EQ(plain, (std::vector<size_t>{0, 1, 2, 3, 4}));
}

TEST(Loader, BatchesIndependentOfWorkerCount) {
  const auto samples = tiny_samples(10);
  const h::SampleSource src = [&](size_t i) { return samples.at(i); };
  const auto order = h::epoch_order(samples.size(), 1, 0);
  std::vector<uint64_t> hashes[2];
  const int workers[2] = {1, 3};
  for (int k = 0; k < 2; ++k) {
    h::BatchLoader loader(src, order, 4, 64, workers[k]);
    EXPECT_EQ(loader.num_batches(), 3u);
    while (auto b = loader.next()) hashes[k].push_back(h::batch_hash(*b));
  }
  EXPECT_EQ(hashes[0].size(), 3u);
  EXPECT_EQ(hashes[0], hashes[1]);
}

TEST(Loader, ReaderErrorsPropagate) {
  const h::SampleSource src = [](size_t i) -> data::Sample {
    if (i == 2) throw litchi::IoError("img2.png", "unreadable");
    return {{"x", 8, 8, {}, data::Provenance::original}, data::Image(8, 8)};
  };
  h::BatchLoader loader(src, {0, 1, 2, 3}, 2, 8, 2);
  EXPECT_THROW(
      {
        while (loader.next()) {
        }
      },
      litchi::IoError);
}

TEST(Loader, ImageTensorLayout) {
  data::Image img(2, 2);
  img.px(1, 0)[0] = 255;
  img.px(0, 1)[2] = 51;
  const auto t = h::image_to_tensor(img, 2);
  ASSERT_EQ(t.shape(), (litchi::nn::Shape{1, 3, 2, 2}));
  EXPECT_FLOAT_EQ(t.data()[1], 1.0f);
  EXPECT_FLOAT_EQ(t.data()[8 + 2], 0.2f);
}

TEST(Train, TwoEpochsWriteHistoryAndCheckpoint) {
  const auto dir = fresh_dir("two_epochs");
  auto cfg = tiny_config(2);
  cfg.eval_interval = 1;
  auto model = detect::build_model<float>(cfg.model, cfg.seed);
  int calls = 0;
  const auto res = h::train(*model, h::in_memory_data(tiny_samples()), cfg, dir.string(),
                            [&](const h::EpochRecord&) { ++calls; });
  ASSERT_EQ(res.history.size(), 2u);
  EXPECT_EQ(calls, 2);
  EXPECT_TRUE(res.history[1].val_map50.has_value());
  EXPECT_EQ(res.validation_subset, "train");
  EXPECT_TRUE(fs::exists(res.best_checkpoint));
  EXPECT_TRUE(fs::exists(dir / "last.ckpt"));
  const auto csv = slurp(dir / "history.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_map50");
  const auto run = nlohmann::json::parse(slurp(dir / "run.json"));
  EXPECT_EQ(run.at("seed"), 5);
  EXPECT_TRUE(run.contains("git_describe"));
  EXPECT_FALSE(run.at("hardware").get<std::string>().empty());
}

TEST(Train, LossFallsOnOverfitFixture) {
  auto cfg = tiny_config(2);
  auto model = detect::build_model<float>(cfg.model, cfg.seed);
  const auto res = h::train(*model, h::in_memory_data(tiny_samples()), cfg);
  ASSERT_EQ(res.history.size(), 2u);
  EXPECT_LT(res.history[1].train_loss, res.history[0].train_loss);
}

TEST(Train, SameSeedGivesIdenticalFirstEpoch) {
  auto cfg = tiny_config(1);
  const auto samples = tiny_samples();
  double loss[2];
  uint64_t hash[2];
  for (int k = 0; k < 2; ++k) {
    auto model = detect::build_model<float>(cfg.model, cfg.seed);
    const auto res = h::train(*model, h::in_memory_data(samples), cfg);
    loss[k] = res.history.at(0).train_loss;
    hash[k] = res.first_batch_hash;
  }
  EXPECT_EQ(std::round(loss[0] * 1e6), std::round(loss[1] * 1e6));
  EXPECT_EQ(hash[0], hash[1]);
}

TEST(Train, EmptyTrainSetRejected) {
  auto cfg = tiny_config(1);
  auto model = detect::build_model<float>(cfg.model, cfg.seed);
  EXPECT_THROW(h::train(*model, h::in_memory_data({}), cfg), litchi::DomainError);
}

TEST(Checkpoint, SaveLoadEvaluateReproducesReport) {
  const auto dir = fresh_dir("ckpt");
  auto cfg = tiny_config(1);
  auto model = detect::build_model<float>(cfg.model, cfg.seed);
  const auto samples = tiny_samples(8);
  h::train(*model, h::in_memory_data(samples), cfg);
  const auto path = (dir / "m.ckpt").string();
  h::save_checkpoint(*model, path, {{"note", "x"}});
  const auto loaded = h::load_checkpoint<float>(path);
  EXPECT_EQ(loaded.extra.at("note"), "x");
  EXPECT_EQ(h::model_manifest(*loaded.model), h::model_manifest(*model));
  const auto a = h::evaluate_samples(*model, samples, 64, 0.001, 0.7);
  const auto b = h::evaluate_samples(*loaded.model, samples, 64, 0.001, 0.7);
  EXPECT_EQ(a, b);
}

TEST(Checkpoint, MissingOrCorruptFileNamesThePath) {
  const auto dir = fresh_dir("bad_ckpt");
  const auto missing = (dir / "missing.ckpt").string();
  try {
    h::load_checkpoint<float>(missing);
    FAIL() << "expected an error";
  } catch (const litchi::IoError& e) {
    EXPECT_EQ(e.path(), missing);
  }
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  EXPECT_THROW(h::load_checkpoint<float>((dir / "junk.ckpt").string()), litchi::IoError);
}

TEST(Evaluate, CheckpointOnDatasetWritesArtifacts) {
  const auto dir = fresh_dir("eval");
  const auto samples = tiny_samples(10);
  std::vector<std::string> ids;
  for (const auto& s : samples) ids.push_back(s.record.image_id);
  data::write_dataset((dir / "data").string(), samples, data::split_dataset(ids, 0));
  auto cfg = tiny_config(1);
  auto model = detect::build_model<float>(cfg.model, cfg.seed);
  h::save_checkpoint(*model, (dir / "m.ckpt").string());
  const auto report = h::evaluate_checkpoint((dir / "m.ckpt").string(), (dir / "data").string(), data::Subset::val,
                                             (dir / "out").string());
  for (const char* f : {"report.json", "per_class_ap.csv", "occlusion.csv", "pr_curves.png", "predictions.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  EXPECT_EQ(report.params_m, litchi::metrics::count_params(*model) / 1e6);
  const auto dump = nlohmann::json::parse(slurp(dir / "out" / "predictions.json"));
  EXPECT_EQ(dump.size(), 2u);
}

TEST(Ablation, GridEnumeratesAllToggles) {
  const auto grid = h::ablation_grid();
  std::set<std::string> tags;
  for (const auto& t : grid) tags.insert(t.tag());
  EXPECT_EQ(tags.size(), 8u);
  EXPECT_FALSE(grid.front().a || grid.front().b || grid.front().c);
  EXPECT_TRUE(grid.back().a && grid.back().b && grid.back().c);
}

TEST(Ablation, CsvKeepsFailedCells) {
  std::vector<h::AblationCell> cells;
  for (const auto& t : h::ablation_grid()) cells.push_back({t, std::nullopt, 0, "boom"});
  const auto csv = h::ablation_csv(cells);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "A,B,C,Params,GFLOPs,P,R,F1,mAP@50");
}

TEST(Ablation, RunSharesDataOrderAcrossCells) {
  const auto dir = fresh_dir("ablation");
  const auto cells = h::run_ablation(h::in_memory_data(tiny_samples(8)), tiny_config(1), dir.string());
  ASSERT_EQ(cells.size(), 8u);
  for (const auto& c : cells) {
    ASSERT_TRUE(c.report.has_value()) << c.toggles.tag() << ": " << c.error;
    EXPECT_EQ(c.first_batch_hash, cells[0].first_batch_hash);
  }
  EXPECT_LT(cells[2].report->params_m, cells[0].report->params_m);
  EXPECT_LT(cells[7].report->params_m, cells[0].report->params_m);
  const auto csv = slurp(dir / "ablation.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_TRUE(fs::exists(dir / "ablation_hashes.csv"));
}
