// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

/// `litchi` command-line entry point: one subcommand per pipeline stage.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "litchi/data/augment.hpp"
#include "litchi/data/dataset.hpp"
#include "litchi/data/synth.hpp"
#include "litchi/data/tiling.hpp"
#include "litchi/error.hpp"
#include "litchi/geometry/flight.hpp"
#include "litchi/harness/ablation.hpp"
#include "litchi/harness/checkpoint.hpp"
#include "litchi/harness/config.hpp"
#include "litchi/harness/loader.hpp"
#include "litchi/harness/trainer.hpp"
#include "litchi/metrics/profile.hpp"
#include "litchi/metrics/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace litchi::cli {
namespace {

/// Reference GPU throughput of the full model, printed next to local numbers.
constexpr double kReferenceFps = 57.2;
constexpr const char* kReferenceHardware = "NVIDIA RTX 3090";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot write file");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path make_out(const std::string& out) {
  fs::create_directories(out);
  return fs::path(out);
}

/// Records whether an option was given so file values survive unless a flag
/// overrides them.
template <typename V>
struct Flag {
  std::shared_ptr<V> value;
  CLI::Option* opt = nullptr;
  bool given() const { return opt != nullptr && opt->count() > 0; }
  void apply(V& target) const {
    if (given()) target = *value;
  }
};

template <typename V>
Flag<V> add_flag(CLI::App* app, const std::string& name, V init, const std::string& help) {
  Flag<V> f{std::make_shared<V>(init)};
  f.opt = app->add_option(name, *f.value, help)->capture_default_str();
  return f;
}

struct ModelFlags {
  std::string checkpoint;
  std::string model_config;
  std::string toggles = "ABC";
  int image_size = 640;
  uint64_t seed = 0;

  void add(CLI::App* app, int default_size) {
    image_size = default_size;
    app->add_option("--checkpoint", checkpoint, "Load weights and architecture from a checkpoint");
    app->add_option("--model-config", model_config, "Model JSON used when no checkpoint is given");
    app->add_option("--toggles", toggles, "Enabled blocks when building from scratch: any of A, B, C, or 'none'")
        ->capture_default_str();
    app->add_option("--image-size", image_size, "Square input size in pixels")->capture_default_str();
    app->add_option("--seed", seed, "Weight initialisation seed for freshly built models")->capture_default_str();
  }

  std::shared_ptr<detect::Detector<float>> build() const {
    if (!checkpoint.empty()) return harness::load_checkpoint<float>(checkpoint).model;
    detect::ModelConfig cfg = model_config.empty() ? detect::ModelConfig{} : detect::read_model_config(model_config);
    if (toggles != "none") {
      for (char c : toggles)
        if (c != 'A' && c != 'B' && c != 'C') throw DomainError("toggles", "expected letters A, B, C or 'none'");
    }
    cfg.use_c3msr = toggles.find('A') != std::string::npos;
    cfg.use_f3 = toggles.find('B') != std::string::npos;
    cfg.use_litchi_head = toggles.find('C') != std::string::npos;
    cfg.input_size = image_size;
    return detect::build_model<float>(cfg, seed);
  }
};

void add_plan_flight(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("plan-flight", "Camera tilt, vision radius and flight height for a canopy");
  struct Opts {
    double radius = 0, height = 0, trunk = 0, fov_deg = 0, clearance = 4.0;
    bool vertical = false;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--canopy-radius", o->radius, "Canopy radius R in meters")->required();
  app->add_option("--canopy-height", o->height, "Canopy height H in meters")->required();
  app->add_option("--trunk-length", o->trunk, "Trunk length L in meters")->capture_default_str();
  app->add_option("--fov-deg", o->fov_deg, "Full longitudinal field of view in degrees");
  app->add_flag("--vertical", o->vertical, "Plan a nadir pass instead of an oblique one");
  app->add_option("--clearance", o->clearance, "Vertical clearance above the canopy in meters")->capture_default_str();
  app->add_option("--out", o->out, "Also write plan.json into this directory");
  app->callback([o, &run] {
    run = [o] {
      json j;
      if (o->vertical) {
        j = {{"mode", "vertical"}, {"alpha_deg", 0.0}, {"flight_height_m", geometry::plan_vertical(o->height, o->clearance)}};
      } else {
        if (o->fov_deg <= 0) throw DomainError("fov-deg", "required for oblique plans and must be positive");
        geometry::CanopyMeasurement m{o->radius, o->height, o->trunk, geometry::degrees_to_radians(o->fov_deg)};
        const auto plan = geometry::plan_oblique(m);
        j = {{"mode", "oblique"},
             {"alpha_deg", geometry::radians_to_degrees(plan.tilt)},
             {"vision_radius_m", plan.vision_radius},
             {"flight_height_m", plan.flight_height}};
      }
      std::cout << j.dump(2) << "\n";
      if (!o->out.empty()) write_json(make_out(o->out) / "plan.json", j);
      return 0;
    };
  });
}

void add_tile(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("tile", "Cut full frames into fixed-size tiles with clipped labels");
  struct Opts {
    std::string input, out;
    data::TileOptions tiling;
    bool no_pad = false;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--input", o->input, "Folder with images/ and labels/ of full frames")->required();
  app->add_option("--out", o->out, "Output folder (images/, labels/, tiles.json)")->required();
  app->add_option("--tile", o->tiling.tile, "Tile edge in pixels")->capture_default_str();
  app->add_option("--stride", o->tiling.stride, "Step between tile origins in pixels")->capture_default_str();
  app->add_option("--min-area", o->tiling.min_area_fraction, "Keep a clipped box when this share of it survives")
      ->capture_default_str();
  app->add_flag("--no-pad", o->no_pad, "Drop the partial last row and column instead of zero-padding");
  app->callback([o, &run] {
    run = [o] {
      o->tiling.pad = !o->no_pad;
      const auto out = make_out(o->out);
      json manifest = json::array();
      size_t tiles = 0;
      for (const auto& f : data::flat_folder_files(o->input)) {
        const auto frame = data::load_sample(f);
        for (const auto& t : data::tile_image(frame.record, frame.image, o->tiling)) {
          data::write_flat_sample(out.string(), {t.record, t.image});
          manifest.push_back({{"tile", t.record.image_id},
                              {"frame", f.image_id},
                              {"row", t.row},
                              {"col", t.col},
                              {"offset_x", t.offset_x},
                              {"offset_y", t.offset_y}});
          ++tiles;
        }
      }
      write_json(out / "tiles.json", manifest);
      std::cout << "wrote " << tiles << " tiles to " << out.string() << "\n";
      return 0;
    };
  });
}

void add_split(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("split", "Assign images to train/val/test at 7:2:1");
  struct Opts {
    std::string input, out;
    uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--input", o->input, "Folder with images/ and labels/")->required();
  app->add_option("--out", o->out, "Dataset root to create")->required();
  app->add_option("--seed", o->seed, "Shuffle seed")->capture_default_str();
  app->callback([o, &run] {
    run = [o] {
      const auto files = data::flat_folder_files(o->input);
      std::vector<std::string> ids;
      for (const auto& f : files) ids.push_back(f.image_id);
      const auto split = data::split_dataset(ids, o->seed);
      std::map<std::string, data::Subset> bucket;
      for (auto s : {data::Subset::train, data::Subset::val, data::Subset::test})
        for (const auto& id : split.ids(s)) bucket[id] = s;
      const auto out = make_out(o->out);
      for (const auto& f : files) data::write_subset_sample(out.string(), bucket.at(f.image_id), data::load_sample(f));
      data::write_split(out.string(), split);
      std::cout << "train " << split.train.size() << " val " << split.val.size() << " test " << split.test.size()
                << "\n";
      return 0;
    };
  });
}

void add_augment(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("augment", "Copy a dataset and add pixel-augmented copies of train images");
  struct Opts {
    std::string data, out, ops = "gauss,sp,bright,dark";
    uint64_t seed = 0;
    data::AugmentParams params;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--data", o->data, "Source dataset root")->required();
  app->add_option("--out", o->out, "Dataset root to create")->required();
  app->add_option("--ops", o->ops, "Comma list of gauss, sp, bright, dark")->capture_default_str();
  app->add_option("--seed", o->seed, "Noise seed")->capture_default_str();
  app->add_option("--sigma", o->params.gaussian_sigma, "Gaussian noise standard deviation")->capture_default_str();
  app->add_option("--sp-prob", o->params.salt_pepper_p, "Salt-and-pepper pixel probability")->capture_default_str();
  app->add_option("--bright-gain", o->params.brighten_gain, "Brightening gain")->capture_default_str();
  app->add_option("--dark-gain", o->params.darken_gain, "Darkening gain")->capture_default_str();
  app->callback([o, &run] {
    run = [o] {
      const auto ops = data::parse_augment_ops(o->ops);
      auto split = data::read_split(o->data);
      const auto out = make_out(o->out);
      std::vector<std::string> added;
      for (auto s : {data::Subset::train, data::Subset::val, data::Subset::test}) {
        for (const auto& f : data::subset_files(o->data, s)) {
          auto sample = data::load_sample(f);
          data::write_subset_sample(out.string(), s, sample);
          if (s != data::Subset::train) continue;
          for (size_t k = 0; k < ops.size(); ++k) {
            const uint64_t seed = o->seed * 1000003ULL + std::hash<std::string>{}(f.image_id) + k;
            auto aug = data::augment(sample.record, sample.image, ops[k], seed, split, o->params);
            data::write_subset_sample(out.string(), s, {aug.record, aug.image});
            added.push_back(aug.record.image_id);
          }
        }
      }
      split.train.insert(split.train.end(), added.begin(), added.end());
      split.check_disjoint();
      data::write_split(out.string(), split);
      std::cout << "added " << added.size() << " augmented train images\n";
      return 0;
    };
  });
}

void add_synth(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("synth", "Render a synthetic orchard dataset with occlusion labels");
  struct Opts {
    std::string config, out;
    data::SynthConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--config", o->config, "Synthetic data JSON; flags override its values");
  app->add_option("--out", o->out, "Dataset root to create")->required();
  auto count = add_flag(app, "--count", o->cfg.image_count, "Number of images");
  auto size = add_flag(app, "--image-size", o->cfg.image_size, "Square image size in pixels");
  auto seed = add_flag(app, "--seed", o->cfg.rng_seed, "Generator seed");
  auto train_only = add_flag(app, "--train-only", o->cfg.train_only, "Put every image in train (true/false)");
  app->callback([o, count, size, seed, train_only, &run] {
    run = [o, count, size, seed, train_only] {
      data::SynthConfig cfg = o->config.empty() ? data::SynthConfig{} : [&] {
        std::ifstream in(o->config);
        if (!in) throw IoError(o->config, "cannot open synth config");
        try {
          return data::synth_config_from_json(json::parse(in));
        } catch (const json::exception& e) {
          throw IoError(o->config, e.what());
        }
      }();
      count.apply(cfg.image_count);
      size.apply(cfg.image_size);
      seed.apply(cfg.rng_seed);
      train_only.apply(cfg.train_only);
      cfg.validate();
      std::vector<data::Sample> samples;
      std::vector<std::string> ids;
      for (auto& s : data::generate_synthetic(cfg)) {
        ids.push_back(s.record.image_id);
        samples.push_back({std::move(s.record), std::move(s.image)});
      }
      const auto split = cfg.train_only ? data::train_only_split(ids, cfg.rng_seed) : data::split_dataset(ids, cfg.rng_seed);
      const auto out = make_out(o->out);
      data::write_dataset(out.string(), samples, split);
      write_json(out / "synth_config.json", data::to_json(cfg));
      std::cout << "wrote " << samples.size() << " images to " << out.string() << "\n";
      return 0;
    };
  });
}

struct TrainFlags {
  std::string config, profile = "full", out;
  Flag<std::string> data;
  Flag<uint64_t> seed;
  Flag<int> epochs;
  Flag<int> batch;
  Flag<int> image_size;
  Flag<int> workers;
  Flag<double> lr;
  Flag<int> eval_interval;

  void add(CLI::App* app, const std::string& default_out) {
    out = default_out;
    harness::TrainConfig d;
    app->add_option("--config", config, "Training JSON; flags override its values");
    app->add_option("--profile", profile, "Base settings before the config file: full or desk")
        ->check(CLI::IsMember({"full", "desk"}))
        ->capture_default_str();
    data = add_flag<std::string>(app, "--data", "", "Dataset root (images/, labels/, split.json)");
    seed = add_flag(app, "--seed", d.seed, "Seed for weights, data order and augmentation");
    epochs = add_flag(app, "--epochs", d.epochs, "Training epochs");
    batch = add_flag(app, "--batch", d.batch_size, "Batch size");
    image_size = add_flag(app, "--image-size", d.image_size, "Square training resolution");
    workers = add_flag(app, "--workers", d.workers, "Data loading threads");
    lr = add_flag(app, "--lr", d.lr, "Initial learning rate");
    eval_interval = add_flag(app, "--eval-interval", d.eval_interval, "Validate every N epochs (0 disables)");
    app->add_option("--out", out, "Run directory")->capture_default_str();
  }

  harness::TrainConfig resolve() const {
    harness::TrainConfig cfg = profile == "desk" ? harness::desk_profile() : harness::TrainConfig{};
    if (!config.empty()) cfg = harness::read_train_config(config, cfg);
    data.apply(cfg.data);
    seed.apply(cfg.seed);
    epochs.apply(cfg.epochs);
    batch.apply(cfg.batch_size);
    workers.apply(cfg.workers);
    lr.apply(cfg.lr);
    eval_interval.apply(cfg.eval_interval);
    if (image_size.given()) {
      cfg.image_size = *image_size.value;
      cfg.model.input_size = *image_size.value;
    }
    if (cfg.data.empty()) throw DomainError("data", "no dataset root given (--data or \"data\" in the config)");
    cfg.validate();
    return cfg;
  }
};

void add_train(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("train", "Train a detector and keep the best validation checkpoint");
  auto f = std::make_shared<TrainFlags>();
  f->add(app, "runs/train");
  app->callback([f, &run] {
    run = [f] {
      const auto cfg = f->resolve();
      const auto out = make_out(f->out);
      auto model = detect::build_model<float>(cfg.model, cfg.seed);
      const auto result = harness::train(*model, harness::load_train_data(cfg.data), cfg, out.string(),
                                         [](const harness::EpochRecord& r) {
                                           std::printf("epoch %d train_loss %.6f lr %.6f", r.epoch, r.train_loss, r.lr);
                                           if (r.val_map50) std::printf(" val_map50 %.4f", *r.val_map50);
                                           std::printf("\n");
                                           std::fflush(stdout);
                                         });
      std::cout << "best checkpoint " << result.best_checkpoint << " (val mAP@50 " << result.best_val_map50 << " on "
                << result.validation_subset << ")\n";
      return 0;
    };
  });
}

void add_ablate(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("ablate", "Train and evaluate all eight block toggle combinations");
  auto f = std::make_shared<TrainFlags>();
  f->add(app, "runs/ablation");
  app->callback([f, &run] {
    run = [f] {
      const auto cfg = f->resolve();
      const auto out = make_out(f->out);
      const auto cells = harness::run_ablation(harness::load_train_data(cfg.data), cfg, out.string(),
                                               [](const harness::AblationCell& c) {
                                                 std::cout << "cell " << c.toggles.tag()
                                                           << (c.report ? " done" : " failed: " + c.error) << "\n";
                                               });
      std::cout << harness::ablation_csv(cells);
      for (const auto& c : cells)
        if (!c.report) return 1;
      return 0;
    };
  });
}

void add_eval(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("eval", "Score a checkpoint on one split and write the metrics report");
  struct Opts {
    std::string checkpoint, data, split = "val", out = "runs/eval";
    double conf = 0.001, nms_iou = 0.7;
  };
  auto o = std::make_shared<Opts>();
  app->add_option("--checkpoint", o->checkpoint, "Checkpoint file")->required();
  app->add_option("--data", o->data, "Dataset root; defaults to the one recorded next to the checkpoint");
  app->add_option("--split", o->split, "Subset to score")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  app->add_option("--conf", o->conf, "Minimum detection score kept for the PR curve")->capture_default_str();
  app->add_option("--nms-iou", o->nms_iou, "NMS IoU threshold")->capture_default_str();
  app->add_option("--out", o->out, "Report directory")->capture_default_str();
  app->callback([o, &run] {
    run = [o] {
      if (!fs::exists(o->checkpoint)) throw IoError(o->checkpoint, "checkpoint not found");
      std::string root = o->data;
      if (root.empty()) {
        const auto run_json = fs::path(o->checkpoint).parent_path() / "run.json";
        std::ifstream in(run_json);
        if (!in) throw DomainError("data", "no --data given and no run.json beside " + o->checkpoint);
        root = json::parse(in).at("config").at("data").get<std::string>();
      }
      const auto report = harness::evaluate_checkpoint(o->checkpoint, root, data::parse_subset(o->split),
                                                       make_out(o->out).string(), o->conf, o->nms_iou);
      std::printf("P %.4f R %.4f F1 %.4f mAP@50 %.4f mAP@50:95 %.4f\n", report.precision, report.recall, report.f1,
                  report.map50, report.map5095);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    };
  });
}

void add_bench(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("bench", "Parameter count, GFLOPs and single-image throughput");
  struct Opts {
    ModelFlags model;
    int warmup = 3, iters = 20;
    std::string out = "runs/bench";
  };
  auto o = std::make_shared<Opts>();
  o->model.add(app, 640);
  app->add_option("--warmup", o->warmup, "Untimed iterations")->capture_default_str();
  app->add_option("--iters", o->iters, "Timed iterations")->capture_default_str();
  app->add_option("--out", o->out, "Output directory")->capture_default_str();
  app->callback([o, &run] {
    run = [o] {
      auto model = o->model.build();
      const int size = o->model.checkpoint.empty() ? o->model.image_size : model->config().input_size;
      const auto fps = metrics::fps_benchmark(*model, size, o->warmup, o->iters);
      const json j{{"toggles", model->config().toggle_tag()},
                   {"image_size", size},
                   {"params", metrics::count_params(*model)},
                   {"gflops", metrics::count_gflops(*model, size)},
                   {"fps", fps.fps},
                   {"mean_latency_ms", fps.mean_latency_ms},
                   {"iterations", fps.iterations},
                   {"hardware", fps.hardware},
                   {"reference_fps", kReferenceFps},
                   {"reference_hardware", kReferenceHardware},
                   {"reference_note", "reference GPU figure; shown for comparison only, not a target"}};
      write_json(make_out(o->out) / "bench.json", j);
      std::cout << j.dump(2) << "\n";
      return 0;
    };
  });
}

void add_erf(CLI::App& root, std::function<int()>& run) {
  auto* app = root.add_subcommand("erf", "Effective receptive field heatmap of the deepest backbone feature");
  struct Opts {
    ModelFlags model;
    int batch = 4;
    std::string data, out = "runs/erf";
  };
  auto o = std::make_shared<Opts>();
  o->model.add(app, 256);
  app->add_option("--batch", o->batch, "Inputs averaged into the map")->capture_default_str();
  app->add_option("--data", o->data, "Dataset root whose val images are used instead of noise");
  app->add_option("--out", o->out, "Output directory")->capture_default_str();
  app->callback([o, &run] {
    run = [o] {
      if (o->batch < 1) throw DomainError("batch", "must be at least 1");
      auto model = o->model.build();
      const int size = o->model.checkpoint.empty() ? o->model.image_size : model->config().input_size;
      nn::Tensor<float> input;
      std::string source = "uniform noise";
      if (!o->data.empty()) {
        auto samples = data::load_subset(o->data, data::Subset::val);
        if (samples.empty()) samples = data::load_subset(o->data, data::Subset::train);
        if (samples.size() > static_cast<size_t>(o->batch)) samples.resize(static_cast<size_t>(o->batch));
        input = harness::make_batch(samples, size).images;
        source = o->data;
      } else {
        input = nn::Tensor<float>::zeros({o->batch, 3, size, size});
        std::mt19937_64 rng(o->model.seed);
        std::uniform_real_distribution<float> u(0.0f, 1.0f);
        for (int64_t i = 0; i < input.numel(); ++i) input.data()[i] = u(rng);
      }
      const auto map = metrics::erf_gradient(*model, input);
      float peak = 0;
      for (int64_t i = 0; i < map.numel(); ++i) peak = std::max(peak, map.data()[i]);
      int64_t support = 0;
      for (int64_t i = 0; i < map.numel(); ++i) support += map.data()[i] > 0.01f * peak;
      const auto out = make_out(o->out);
      data::write_image(metrics::render_heatmap(map), (out / "erf.png").string());
      const json j{{"toggles", model->config().toggle_tag()},
                   {"image_size", size},
                   {"batch", input.dim(0)},
                   {"input", source},
                   {"peak_gradient", peak},
                   {"support_fraction_1pct", static_cast<double>(support) / static_cast<double>(map.numel())}};
      write_json(out / "erf.json", j);
      std::cout << j.dump(2) << "\n";
      return 0;
    };
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"litchi: aerial litchi detection toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::function<int()> run;
  add_plan_flight(app, run);
  add_tile(app, run);
  add_split(app, run);
  add_augment(app, run);
  add_synth(app, run);
  add_train(app, run);
  add_eval(app, run);
  add_ablate(app, run);
  add_bench(app, run);
  add_erf(app, run);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run ? run() : 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    std::cerr << "error: invalid " << e.what() << "\n";
  } catch (const ShapeError& e) {
    std::cerr << "error: shape mismatch: " << e.what() << "\n";
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace
}  // namespace litchi::cli

int main(int argc, char** argv) { return litchi::cli::run_cli(argc, argv); }
