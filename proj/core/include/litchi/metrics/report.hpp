// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litchi/data/image.hpp"
#include "litchi/metrics/eval.hpp"

namespace litchi::metrics {

struct OcclusionEntry {
  std::string name;
  OcclusionRow row;
  bool operator==(const OcclusionEntry&) const = default;
};

struct MetricsReport {
  double precision = 0, recall = 0, f1 = 0;
  double map50 = 0, map5095 = 0;
  std::vector<std::string> class_names;
  std::vector<std::optional<double>> ap50, ap5095;
  std::vector<OcclusionEntry> occlusion;
  double params_m = 0;
  double gflops = 0;
  double fps = 0;
  std::string hardware;
  /// Matching and interpolation protocol, written into the report header.
  double match_iou = 0.5;
  double operating_conf = 0.25;
  int ap_samples = kApSamples;
  bool occlusion_class_agnostic = true;
  std::vector<std::string> warnings;

  bool operator==(const MetricsReport&) const = default;
};

/// Copies the accuracy fields from an evaluation result.
MetricsReport make_report(const EvalResult& result, const std::vector<std::string>& class_names,
                          const EvalOptions& options);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);
void write_report(const MetricsReport& report, const std::string& path);
MetricsReport read_report(const std::string& path);

/// class,ap50,ap50_95 rows; classes without ground truth leave both empty.
std::string per_class_ap_csv(const MetricsReport& report);
/// One header row of Actual/Undetected pairs per occlusion class and one
/// value row, classes in the order fruit occluded, non occluded,
/// branch/leaf occluded.
std::string occlusion_csv(const MetricsReport& report);

/// Precision against recall, one colour per class, on a white canvas.
data::Image plot_pr_curves(const std::vector<PrCurve>& curves, int size = 480);

}  // namespace litchi::metrics
