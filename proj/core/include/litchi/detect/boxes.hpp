// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "litchi/data/annotation.hpp"
#include "litchi/nn/head.hpp"

namespace litchi::detect {

/// Axis-aligned box in pixels.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
  bool operator==(const Box&) const = default;
};

struct Detection {
  Box box;
  double score = 0;
  int class_id = 0;
};

double iou(const Box& a, const Box& b);
/// Complete IoU: IoU minus centre distance and aspect-ratio penalties.
double ciou(const Box& a, const Box& b);

Box box_from_annotation(const data::BoxAnnotation& a, int image_w, int image_h);
data::BoxAnnotation annotation_from_box(const Box& b, int class_id, int image_w, int image_h);

/// Side distances (left, top, right, bottom) from the centre of grid cell
/// (gy, gx) at `stride`.
Box box_from_distances(const std::array<double, 4>& d, int64_t gy, int64_t gx, int stride);
std::array<double, 4> distances_from_box(const Box& b, int64_t gy, int64_t gx, int stride);

struct DecodeOptions {
  double conf_threshold = 0.001;
  /// Candidates kept per image before suppression, highest score first.
  size_t max_candidates = 3000;
};

/// Raw head maps to per-image detections. Distances are softplus(raw) * stride,
/// scores sigmoid(logit); every (cell, class) above the threshold is emitted
/// and boxes are clipped to the image.
template <typename T>
std::vector<std::vector<Detection>> decode(const std::vector<nn::HeadOutput<T>>& outputs,
                                           const std::vector<int>& strides, int image_w, int image_h,
                                           const DecodeOptions& options = {});

/// Class-wise greedy suppression after a confidence pre-filter. Ordering is a
/// stable sort by descending score, so equal scores keep input order.
std::vector<Detection> nms(const std::vector<Detection>& dets, double conf_threshold, double iou_threshold,
                           size_t max_detections = 300);

extern template std::vector<std::vector<Detection>> decode<float>(const std::vector<nn::HeadOutput<float>>&,
                                                                  const std::vector<int>&, int, int,
                                                                  const DecodeOptions&);
extern template std::vector<std::vector<Detection>> decode<double>(const std::vector<nn::HeadOutput<double>>&,
                                                                   const std::vector<int>&, int, int,
                                                                   const DecodeOptions&);

}  // namespace litchi::detect
