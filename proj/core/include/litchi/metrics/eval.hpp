// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "litchi/detect/boxes.hpp"

namespace litchi::metrics {

using detect::Box;
using detect::Detection;

struct GroundTruth {
  Box box;
  int class_id = 0;
};

struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Outcome of greedy matching for one image.
struct MatchResult {
  ConfusionCounts counts;
  /// Detection indices in matching order (descending score, stable).
  std::vector<size_t> order;
  /// Per detection (input index): index of the matched ground truth or -1.
  std::vector<int> det_match;
  /// Per ground truth: matched detection index or -1.
  std::vector<int> gt_match;
};

/// Each detection, in descending score order, takes the unmatched ground
/// truth of highest IoU >= threshold (same class unless class_agnostic).
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_threshold = 0.5, bool class_agnostic = false);

/// 0 when the denominator is 0.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);
double f1(double p, double r);

struct PrPoint {
  double recall = 0, precision = 0;
};

/// Points after each detection of a descending-confidence sweep.
struct PrCurve {
  int class_id = 0;
  int64_t num_gt = 0;
  std::vector<PrPoint> points;
};

/// Scored match flags for one class pooled over images.
struct ScoredFlag {
  double score = 0;
  bool tp = false;
};
PrCurve pr_curve(std::vector<ScoredFlag> flags, int64_t num_gt, int class_id = 0);

inline constexpr int kApSamples = 101;
/// Precision envelope sampled at recall 0.00, 0.01, ..., 1.00 and averaged.
double average_precision(const PrCurve& curve);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

struct OcclusionRow {
  int64_t actual = 0;
  int64_t undetected = 0;
  /// undetected / actual; empty when there is no ground truth of the class.
  std::optional<double> miss_rate;
  bool operator==(const OcclusionRow&) const = default;
};
OcclusionRow occlusion_row(int64_t actual, int64_t undetected);

struct EvalOptions {
  int num_classes = 3;
  double match_iou = 0.5;
  /// Operating point for precision, recall, F1 and the occlusion table.
  double operating_conf = 0.25;
};

struct EvalResult {
  ConfusionCounts counts;
  double precision = 0, recall = 0, f1 = 0;
  double map50 = 0, map5095 = 0;
  /// Empty for classes without ground truth.
  std::vector<std::optional<double>> ap50, ap5095;
  std::vector<PrCurve> curves50;
  std::vector<OcclusionRow> occlusion;
  std::vector<std::string> warnings;
};

/// Per-image detections and ground truth, aligned by index.
EvalResult evaluate_detections(const std::vector<std::vector<Detection>>& dets,
                               const std::vector<std::vector<GroundTruth>>& gts, const EvalOptions& options = {});

/// Class-agnostic matching at `iou_threshold`; counts ground truth left
/// unmatched per ground-truth class.
std::vector<OcclusionRow> occlusion_breakdown(const std::vector<std::vector<Detection>>& dets,
                                              const std::vector<std::vector<GroundTruth>>& gts, int num_classes,
                                              double iou_threshold = 0.5);

}  // namespace litchi::metrics
