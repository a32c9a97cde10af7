// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/metrics/eval.hpp"

#include <algorithm>
#include <numeric>

#include "litchi/error.hpp"

namespace litchi::metrics {

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_threshold, bool class_agnostic) {
  MatchResult r;
  r.order.resize(dets.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
  r.det_match.assign(dets.size(), -1);
  r.gt_match.assign(gts.size(), -1);
  for (size_t d : r.order) {
    int best = -1;
    double best_iou = iou_threshold;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (r.gt_match[g] >= 0) continue;
      if (!class_agnostic && gts[g].class_id != dets[d].class_id) continue;
      const double o = detect::iou(dets[d].box, gts[g].box);
      if (o >= best_iou && (best < 0 || o > best_iou)) {
        best = static_cast<int>(g);
        best_iou = o;
      }
    }
    if (best >= 0) {
      r.det_match[d] = best;
      r.gt_match[static_cast<size_t>(best)] = static_cast<int>(d);
      ++r.counts.tp;
    } else {
      ++r.counts.fp;
    }
  }
  r.counts.fn = static_cast<int64_t>(std::count(r.gt_match.begin(), r.gt_match.end(), -1));
  return r;
}

double precision(const ConfusionCounts& c) {
  return c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
}

double recall(const ConfusionCounts& c) {
  return c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
}

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }
double f1(const ConfusionCounts& c) { return f1(precision(c), recall(c)); }

PrCurve pr_curve(std::vector<ScoredFlag> flags, int64_t num_gt, int class_id) {
  std::stable_sort(flags.begin(), flags.end(), [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });
  PrCurve curve{class_id, num_gt, {}};
  int64_t tp = 0, fp = 0;
  for (const auto& f : flags) {
    (f.tp ? tp : fp) += 1;
    curve.points.push_back({num_gt > 0 ? static_cast<double>(tp) / static_cast<double>(num_gt) : 0.0,
                            static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return curve;
}

double average_precision(const PrCurve& curve) {
  if (curve.num_gt <= 0 || curve.points.empty()) return 0.0;
  std::vector<double> envelope(curve.points.size());
  double running = 0;
  for (size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    envelope[i] = running;
  }
  double total = 0;
  size_t idx = 0;
  for (int k = 0; k < kApSamples; ++k) {
    const double r = k / 100.0;
    // Recall is non-decreasing along the sweep.
    while (idx < curve.points.size() && curve.points[idx].recall < r - 1e-12) ++idx;
    if (idx == curve.points.size()) break;
    total += envelope[idx];
  }
  return total / kApSamples;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

OcclusionRow occlusion_row(int64_t actual, int64_t undetected) {
  if (actual < 0 || undetected < 0 || undetected > actual) {
    throw DomainError("undetected", "must lie in [0, actual]");
  }
  OcclusionRow row{actual, undetected, std::nullopt};
  if (actual > 0) row.miss_rate = static_cast<double>(undetected) / static_cast<double>(actual);
  return row;
}

std::vector<OcclusionRow> occlusion_breakdown(const std::vector<std::vector<Detection>>& dets,
                                              const std::vector<std::vector<GroundTruth>>& gts, int num_classes,
                                              double iou_threshold) {
  if (dets.size() != gts.size()) throw ShapeError("detections and ground truth cover different image counts");
  std::vector<int64_t> actual(static_cast<size_t>(num_classes), 0), missed(static_cast<size_t>(num_classes), 0);
  for (size_t i = 0; i < gts.size(); ++i) {
    const MatchResult m = match_detections(dets[i], gts[i], iou_threshold, true);
    for (size_t g = 0; g < gts[i].size(); ++g) {
      const int c = gts[i][g].class_id;
      if (c < 0 || c >= num_classes) throw DomainError("class_id", "ground truth class out of range");
      ++actual[static_cast<size_t>(c)];
      if (m.gt_match[g] < 0) ++missed[static_cast<size_t>(c)];
    }
  }
  std::vector<OcclusionRow> rows;
  for (int c = 0; c < num_classes; ++c) rows.push_back(occlusion_row(actual[static_cast<size_t>(c)], missed[static_cast<size_t>(c)]));
  return rows;
}

EvalResult evaluate_detections(const std::vector<std::vector<Detection>>& dets,
                               const std::vector<std::vector<GroundTruth>>& gts, const EvalOptions& o) {
  if (dets.size() != gts.size()) throw ShapeError("detections and ground truth cover different image counts");
  const size_t nc = static_cast<size_t>(o.num_classes);
  const auto thresholds = coco_iou_thresholds();
  EvalResult res;
  std::vector<int64_t> num_gt(nc, 0);
  for (const auto& img : gts)
    for (const auto& g : img) {
      if (g.class_id < 0 || g.class_id >= o.num_classes) throw DomainError("class_id", "ground truth class out of range");
      ++num_gt[static_cast<size_t>(g.class_id)];
    }
  // flags[t][c]: scored match outcomes at IoU threshold t for class c.
  std::vector<std::vector<std::vector<ScoredFlag>>> flags(thresholds.size(), std::vector<std::vector<ScoredFlag>>(nc));
  std::vector<std::vector<Detection>> operating(dets.size());
  for (size_t i = 0; i < dets.size(); ++i) {
    for (size_t t = 0; t < thresholds.size(); ++t) {
      const MatchResult m = match_detections(dets[i], gts[i], thresholds[t]);
      for (size_t d = 0; d < dets[i].size(); ++d) {
        const int c = dets[i][d].class_id;
        if (c < 0 || c >= o.num_classes) continue;
        flags[t][static_cast<size_t>(c)].push_back({dets[i][d].score, m.det_match[d] >= 0});
      }
    }
    for (const auto& d : dets[i])
      if (d.score >= o.operating_conf) operating[i].push_back(d);
    res.counts += match_detections(operating[i], gts[i], o.match_iou).counts;
  }
  res.precision = precision(res.counts);
  res.recall = recall(res.counts);
  res.f1 = f1(res.counts);
  double sum50 = 0, sum5095 = 0;
  int counted = 0;
  for (size_t c = 0; c < nc; ++c) {
    res.curves50.push_back(pr_curve(flags[0][c], num_gt[c], static_cast<int>(c)));
    if (num_gt[c] == 0) {
      res.ap50.emplace_back();
      res.ap5095.emplace_back();
      res.warnings.push_back("class " + std::to_string(c) + " has no ground truth; excluded from mAP");
      continue;
    }
    const double ap50 = average_precision(res.curves50.back());
    double acc = 0;
    for (size_t t = 0; t < thresholds.size(); ++t) {
      acc += t == 0 ? ap50 : average_precision(pr_curve(flags[t][c], num_gt[c], static_cast<int>(c)));
    }
    res.ap50.emplace_back(ap50);
    res.ap5095.emplace_back(acc / static_cast<double>(thresholds.size()));
    sum50 += ap50;
    sum5095 += *res.ap5095.back();
    ++counted;
  }
  if (counted > 0) {
    res.map50 = sum50 / counted;
    res.map5095 = sum5095 / counted;
  }
  res.occlusion = occlusion_breakdown(operating, gts, o.num_classes, o.match_iou);
  return res;
}

}  // namespace litchi::metrics
