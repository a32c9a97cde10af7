// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/ablation.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "litchi/error.hpp"

namespace litchi::harness {

namespace fs = std::filesystem;

std::string Toggles::tag() const {
  std::string t;
  if (a) t += "A";
  if (b) t += "B";
  if (c) t += "C";
  return t.empty() ? "baseline" : t;
}

std::array<Toggles, 8> ablation_grid() {
  return {Toggles{false, false, false}, Toggles{true, false, false}, Toggles{false, true, false},
          Toggles{false, false, true},  Toggles{true, true, false},  Toggles{true, false, true},
          Toggles{false, true, true},   Toggles{true, true, true}};
}

std::vector<AblationCell> run_ablation(const TrainData& data, const TrainConfig& base, const std::string& out_dir,
                                       const std::function<void(const AblationCell&)>& on_cell) {
  std::vector<AblationCell> cells;
  for (const auto& t : ablation_grid()) {
    AblationCell cell{t, std::nullopt, 0, ""};
    try {
      TrainConfig cfg = base;
      cfg.model.use_c3msr = t.a;
      cfg.model.use_f3 = t.b;
      cfg.model.use_litchi_head = t.c;
      const std::string dir = out_dir.empty() ? "" : (fs::path(out_dir) / t.tag()).string();
      auto model = detect::build_model<float>(cfg.model, cfg.seed);
      const auto result = train(*model, data, cfg, dir);
      cell.first_batch_hash = result.first_batch_hash;
      cell.report = evaluate_samples(*model, data.validation, cfg.image_size, cfg.eval_conf, cfg.nms_iou,
                                     {cfg.model.num_classes, 0.5, 0.25});
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(cell);
    if (on_cell) on_cell(cells.back());
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "ablation.csv") << ablation_csv(cells);
    std::ofstream(fs::path(out_dir) / "ablation_hashes.csv") << ablation_hash_csv(cells);
  }
  return cells;
}

std::string ablation_csv(const std::vector<AblationCell>& cells) {
  std::string out = "A,B,C,Params,GFLOPs,P,R,F1,mAP@50\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,", c.toggles.a, c.toggles.b, c.toggles.c);
    out += buf;
    if (c.report) {
      const auto& r = *c.report;
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.1f,%.1f,%.1f,%.1f\n", r.params_m, r.gflops, 100 * r.precision,
                    100 * r.recall, 100 * r.f1, 100 * r.map50);
      out += buf;
    } else {
      out += ",,,,,\n";
    }
  }
  return out;
}

std::string ablation_hash_csv(const std::vector<AblationCell>& cells) {
  std::string out = "toggles,first_batch_hash,error\n";
  char buf[64];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, c.first_batch_hash);
    std::string err = c.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out += c.toggles.tag() + "," + buf + "," + err + "\n";
  }
  return out;
}

}  // namespace litchi::harness
