// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/detect/boxes.hpp"

namespace litchi::detect {

/// One positive cell.
struct Assignment {
  size_t image = 0;
  size_t gt_index = 0;
  int level = 0;
  int64_t gy = 0, gx = 0;
  Box box;
  int class_id = 0;
};

struct AssignResult {
  std::vector<Assignment> positives;
  /// (image, gt_index) pairs whose every candidate cell was already taken.
  std::vector<std::pair<size_t, size_t>> unplaced;
};

/// Order in which strides are tried for a box with the given short side:
/// strides whose cell fits inside the box first, then closest in log scale,
/// then the smaller stride.
std::vector<int> stride_preference(double short_side, const std::vector<int>& strides);

/// One positive cell per box: the cell containing the box centre at the most
/// preferred stride whose cell is still free.
AssignResult assign_targets(const std::vector<std::vector<data::BoxAnnotation>>& gts, int image_w, int image_h,
                            const std::vector<int>& strides);

}  // namespace litchi::detect
