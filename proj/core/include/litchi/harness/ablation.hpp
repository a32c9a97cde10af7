// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "litchi/harness/trainer.hpp"

namespace litchi::harness {

/// A: multi-scale backbone blocks, B: lightweight fusion neck, C: shared head.
struct Toggles {
  bool a = false, b = false, c = false;
  std::string tag() const;
};

/// The eight cells in table order: none, A, B, C, AB, AC, BC, ABC.
std::array<Toggles, 8> ablation_grid();

struct AblationCell {
  Toggles toggles;
  std::optional<metrics::MetricsReport> report;
  uint64_t first_batch_hash = 0;
  std::string error;
};

/// Trains and scores every cell with the same seed and data order. A failing
/// cell keeps its error message and the grid continues. Writes ablation.csv,
/// ablation_hashes.csv and one sub-directory per cell when out_dir is set.
std::vector<AblationCell> run_ablation(const TrainData& data, const TrainConfig& base, const std::string& out_dir = "",
                                       const std::function<void(const AblationCell&)>& on_cell = {});

/// Header A,B,C,Params,GFLOPs,P,R,F1,mAP@50; params in millions, rates in
/// percent, failed cells leave the metric columns empty.
std::string ablation_csv(const std::vector<AblationCell>& cells);
std::string ablation_hash_csv(const std::vector<AblationCell>& cells);

}  // namespace litchi::harness
