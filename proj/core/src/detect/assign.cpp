// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/detect/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "litchi/error.hpp"

namespace litchi::detect {

std::vector<int> stride_preference(double short_side, const std::vector<int>& strides) {
  std::vector<int> order(strides.size());
  std::iota(order.begin(), order.end(), 0);
  const auto key = [&](int i) {
    const double s = strides[static_cast<size_t>(i)];
    return std::make_tuple(s > short_side, std::abs(std::log2(short_side / s)), s);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  return order;
}

AssignResult assign_targets(const std::vector<std::vector<data::BoxAnnotation>>& gts, int image_w, int image_h,
                            const std::vector<int>& strides) {
  if (image_w <= 0 || image_h <= 0) throw DomainError("image_size", "must be positive");
  AssignResult result;
  std::set<std::tuple<size_t, int, int64_t, int64_t>> taken;
  for (size_t n = 0; n < gts.size(); ++n) {
    for (size_t g = 0; g < gts[n].size(); ++g) {
      const auto& a = gts[n][g];
      if (!(a.w > 0 && a.h > 0)) throw DomainError("gt", "zero-area box in image " + std::to_string(n));
      const Box box = box_from_annotation(a, image_w, image_h);
      const double cx = a.cx * image_w, cy = a.cy * image_h;
      bool placed = false;
      for (int level : stride_preference(std::min(box.width(), box.height()), strides)) {
        const int s = strides[static_cast<size_t>(level)];
        const int64_t gw = (image_w + s - 1) / s, gh = (image_h + s - 1) / s;
        const int64_t gx = std::clamp<int64_t>(static_cast<int64_t>(std::floor(cx / s)), 0, gw - 1);
        const int64_t gy = std::clamp<int64_t>(static_cast<int64_t>(std::floor(cy / s)), 0, gh - 1);
        if (!taken.emplace(n, level, gy, gx).second) continue;
        result.positives.push_back({n, g, level, gy, gx, box, a.class_id});
        placed = true;
        break;
      }
      if (!placed) result.unplaced.emplace_back(n, g);
    }
  }
  return result;
}

}  // namespace litchi::detect
