// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "litchi/data/annotation.hpp"
#include "litchi/data/image.hpp"

namespace litchi::data {

template <typename N>
struct Range {
  N min{};
  N max{};
};

struct SynthConfig {
  int image_size = 256;
  int image_count = 16;
  Range<int> fruit_count{3, 8};
  Range<double> fruit_radius_px{7.0, 14.0};
  Range<int> cluster_count{1, 3};
  /// Standard deviation of fruit offsets from a cluster centre, in units of
  /// the largest fruit radius.
  double cluster_spread = 1.2;
  /// Expected strokes per 10^4 pixels of image area.
  double leaf_stroke_density = 1.5;
  Range<double> stroke_half_width_px{2.5, 5.0};
  Range<double> stroke_length_px{20.0, 60.0};
  uint64_t rng_seed = 0;
  /// Place every image in train instead of cutting 7:2:1.
  bool train_only = false;

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct Disk {
  double cx = 0, cy = 0, r = 0;
};

/// Thick segment: every pixel whose centre lies within half_width of it.
struct Stroke {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0, half_width = 0;
};

/// Fruits in drawing order (later ones cover earlier ones); strokes are drawn
/// over all fruits.
struct Scene {
  int width = 0;
  int height = 0;
  std::vector<Disk> fruits;
  std::vector<Stroke> strokes;
};

/// A pixel belongs to a shape when its centre (x + 0.5, y + 0.5) does.
bool disk_covers(const Disk& d, int x, int y);
bool stroke_covers(const Stroke& s, int x, int y);

inline constexpr double kOcclusionThreshold = 0.2;

struct OcclusionStats {
  int64_t area = 0;
  int64_t covered_by_fruit = 0;
  int64_t covered_by_stroke = 0;
};

/// Per-fruit pixel counts: own area, pixels under later fruits, pixels under
/// strokes.
std::vector<OcclusionStats> occlusion_stats(const Scene& scene);

/// fruit_occluded when later fruits cover > 20% of the area, else
/// branch_leaf_occluded when strokes cover > 20%, else non_occluded.
Occlusion classify(const OcclusionStats& s);

std::vector<BoxAnnotation> scene_annotations(const Scene& scene);

/// Deterministic scene for image `index`; throws DomainError when the fruits
/// cannot be placed within the retry budget.
Scene generate_scene(const SynthConfig& cfg, int index);
Image render_scene(const Scene& scene, uint64_t texture_seed);

struct SynthSample {
  ImageRecord record;
  Image image;
  Scene scene;
};

/// image_count samples named "synth_0000", ...
std::vector<SynthSample> generate_synthetic(const SynthConfig& cfg);
SynthSample generate_sample(const SynthConfig& cfg, int index);

}  // namespace litchi::data
