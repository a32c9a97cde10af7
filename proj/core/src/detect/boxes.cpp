// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/detect/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "litchi/error.hpp"

namespace litchi::detect {

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double ciou(const Box& a, const Box& b) {
  constexpr double eps = 1e-7;
  const double overlap = iou(a, b);
  const double cw = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
  const double ch = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
  const double c2 = cw * cw + ch * ch + eps;
  const double dx = (a.x1 + a.x2 - b.x1 - b.x2) / 2, dy = (a.y1 + a.y2 - b.y1 - b.y2) / 2;
  const double rho2 = dx * dx + dy * dy;
  const double dv = std::atan(b.width() / (b.height() + eps)) - std::atan(a.width() / (a.height() + eps));
  const double v = 4.0 / (std::numbers::pi * std::numbers::pi) * dv * dv;
  const double alpha = v / (v - overlap + (1 + eps));
  return overlap - (rho2 / c2 + v * alpha);
}

Box box_from_annotation(const data::BoxAnnotation& a, int image_w, int image_h) {
  return {(a.cx - a.w / 2) * image_w, (a.cy - a.h / 2) * image_h, (a.cx + a.w / 2) * image_w,
          (a.cy + a.h / 2) * image_h};
}

data::BoxAnnotation annotation_from_box(const Box& b, int class_id, int image_w, int image_h) {
  return {class_id, (b.x1 + b.x2) / 2 / image_w, (b.y1 + b.y2) / 2 / image_h, b.width() / image_w,
          b.height() / image_h};
}

Box box_from_distances(const std::array<double, 4>& d, int64_t gy, int64_t gx, int stride) {
  const double cx = (static_cast<double>(gx) + 0.5) * stride;
  const double cy = (static_cast<double>(gy) + 0.5) * stride;
  return {cx - d[0], cy - d[1], cx + d[2], cy + d[3]};
}

std::array<double, 4> distances_from_box(const Box& b, int64_t gy, int64_t gx, int stride) {
  const double cx = (static_cast<double>(gx) + 0.5) * stride;
  const double cy = (static_cast<double>(gy) + 0.5) * stride;
  return {cx - b.x1, cy - b.y1, b.x2 - cx, b.y2 - cy};
}

namespace {

double softplus(double x) { return x > 20 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

template <typename T>
std::vector<std::vector<Detection>> decode(const std::vector<nn::HeadOutput<T>>& outputs,
                                           const std::vector<int>& strides, int image_w, int image_h,
                                           const DecodeOptions& options) {
  if (outputs.size() != strides.size()) {
    throw ShapeError("decode got " + std::to_string(outputs.size()) + " scales for " +
                     std::to_string(strides.size()) + " strides");
  }
  if (outputs.empty()) return {};
  const int64_t batch = outputs.front().box.dim(0);
  std::vector<std::vector<Detection>> result(static_cast<size_t>(batch));
  for (size_t s = 0; s < outputs.size(); ++s) {
    const auto& box = outputs[s].box.value();
    const auto& cls = outputs[s].cls.value();
    if (box.rank() != 4 || box.dim(1) != 4 || cls.rank() != 4 || cls.dim(0) != batch || box.dim(0) != batch ||
        cls.dim(2) != box.dim(2) || cls.dim(3) != box.dim(3)) {
      throw ShapeError("decode: mismatched head maps " + nn::shape_str(box.shape()) + " / " +
                       nn::shape_str(cls.shape()));
    }
    const int64_t nc = cls.dim(1), h = box.dim(2), w = box.dim(3);
    const int stride = strides[s];
    for (int64_t n = 0; n < batch; ++n) {
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
          Box b;
          bool made = false;
          for (int64_t c = 0; c < nc; ++c) {
            const double score = sigmoid(static_cast<double>(cls.at(n, c, y, x)));
            if (!(score > options.conf_threshold)) continue;
            if (!made) {
              std::array<double, 4> d;
              for (int k = 0; k < 4; ++k) d[k] = softplus(static_cast<double>(box.at(n, k, y, x))) * stride;
              b = box_from_distances(d, y, x, stride);
              b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(image_w));
              b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(image_w));
              b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(image_h));
              b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(image_h));
              made = true;
            }
            if (b.x2 > b.x1 && b.y2 > b.y1) result[n].push_back({b, score, static_cast<int>(c)});
          }
        }
      }
    }
  }
  for (auto& dets : result) {
    if (dets.size() > options.max_candidates) {
      std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
      dets.resize(options.max_candidates);
    }
  }
  return result;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double conf_threshold, double iou_threshold,
                           size_t max_detections) {
  std::vector<size_t> order;
  for (size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score > conf_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> kept;
  for (size_t i : order) {
    const Detection& d = dets[i];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == d.class_id && iou(k.box, d.box) > iou_threshold;
    });
    if (suppressed) continue;
    kept.push_back(d);
    if (kept.size() >= max_detections) break;
  }
  return kept;
}

template std::vector<std::vector<Detection>> decode<float>(const std::vector<nn::HeadOutput<float>>&,
                                                           const std::vector<int>&, int, int, const DecodeOptions&);
template std::vector<std::vector<Detection>> decode<double>(const std::vector<nn::HeadOutput<double>>&,
                                                            const std::vector<int>&, int, int, const DecodeOptions&);

}  // namespace litchi::detect
