// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace litchi::data {

enum class Occlusion : int { none = 0, by_fruit = 1, by_branch_leaf = 2 };

inline constexpr int kNumOcclusionClasses = 3;
inline constexpr std::array<std::string_view, kNumOcclusionClasses> kOcclusionNames{
    "non_occluded", "fruit_occluded", "branch_leaf_occluded"};

/// Box in coordinates normalised to the image width and height.
struct BoxAnnotation {
  int class_id = 0;
  double cx = 0, cy = 0, w = 0, h = 0;

  /// Throws DomainError on class out of range, centre outside [0, 1] or
  /// extent outside (0, 1].
  void validate() const;
  bool operator==(const BoxAnnotation&) const = default;
};

enum class Provenance { original, tiled, augmented, synthetic };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<BoxAnnotation> annotations;
  Provenance provenance = Provenance::original;
};

}  // namespace litchi::data
