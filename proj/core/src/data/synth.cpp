// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "litchi/error.hpp"

namespace litchi::data {

namespace {

template <typename N>
void check_range(const char* field, const Range<N>& r) {
  if (!(r.min > 0) || !(r.max >= r.min)) throw DomainError(field, "range must be positive and non-empty");
}

constexpr int kPlacementAttempts = 200;

std::mt19937_64 rng_for(uint64_t seed, int index, int stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(index),
                    static_cast<uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 16) throw DomainError("image_size", "must be >= 16");
  if (image_count < 1) throw DomainError("image_count", "must be >= 1");
  check_range("fruit_count_range", fruit_count);
  check_range("fruit_radius_range_px", fruit_radius_px);
  check_range("cluster_count_range", cluster_count);
  check_range("stroke_half_width_range_px", stroke_half_width_px);
  check_range("stroke_length_range_px", stroke_length_px);
  if (!(cluster_spread > 0) || !std::isfinite(cluster_spread)) {
    throw DomainError("cluster_spread", "must be finite and > 0");
  }
  if (!(leaf_stroke_density >= 0) || !std::isfinite(leaf_stroke_density)) {
    throw DomainError("leaf_stroke_density", "must be finite and >= 0");
  }
  if (2 * fruit_radius_px.max >= image_size) throw DomainError("fruit_radius_range_px", "fruits do not fit the image");
}

nlohmann::json to_json(const SynthConfig& c) {
  const auto range = [](const auto& r) { return nlohmann::json::array({r.min, r.max}); };
  return {{"image_size", c.image_size},
          {"image_count", c.image_count},
          {"fruit_count_range", range(c.fruit_count)},
          {"fruit_radius_range_px", range(c.fruit_radius_px)},
          {"cluster_count_range", range(c.cluster_count)},
          {"cluster_spread", c.cluster_spread},
          {"leaf_stroke_density", c.leaf_stroke_density},
          {"stroke_half_width_range_px", range(c.stroke_half_width_px)},
          {"stroke_length_range_px", range(c.stroke_length_px)},
          {"rng_seed", c.rng_seed},
          {"train_only", c.train_only}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  if (!j.is_object()) throw DomainError("synth_config", "expected a JSON object");
  const auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(key, std::string("wrong type: ") + e.what());
    }
  };
  const auto get_range = [&](const char* key, auto& r) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw DomainError(key, "expected [min, max]");
    try {
      v[0].get_to(r.min);
      v[1].get_to(r.max);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(key, std::string("wrong type: ") + e.what());
    }
  };
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"image_size",           "image_count",          "fruit_count_range",
                                  "fruit_radius_range_px", "cluster_count_range",  "cluster_spread", "leaf_stroke_density",
                                  "stroke_half_width_range_px", "stroke_length_range_px", "rng_seed", "train_only"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
      throw DomainError(key, "unknown synth config key");
    }
  }
  get("image_size", c.image_size);
  get("image_count", c.image_count);
  get_range("fruit_count_range", c.fruit_count);
  get_range("fruit_radius_range_px", c.fruit_radius_px);
  get_range("cluster_count_range", c.cluster_count);
  get("cluster_spread", c.cluster_spread);
  get("leaf_stroke_density", c.leaf_stroke_density);
  get_range("stroke_half_width_range_px", c.stroke_half_width_px);
  get_range("stroke_length_range_px", c.stroke_length_px);
  get("rng_seed", c.rng_seed);
  get("train_only", c.train_only);
  c.validate();
  return c;
}

bool disk_covers(const Disk& d, int x, int y) {
  const double dx = x + 0.5 - d.cx, dy = y + 0.5 - d.cy;
  return dx * dx + dy * dy <= d.r * d.r;
}

bool stroke_covers(const Stroke& s, int x, int y) {
  const double px = x + 0.5, py = y + 0.5;
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - s.x0) * vx + (py - s.y0) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return dx * dx + dy * dy <= s.half_width * s.half_width;
}

std::vector<OcclusionStats> occlusion_stats(const Scene& scene) {
  const int w = scene.width, h = scene.height;
  // Stroke mask and a per-pixel index of the last fruit drawn there.
  std::vector<uint8_t> stroke(static_cast<size_t>(w) * h, 0);
  for (const auto& s : scene.strokes) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - s.half_width)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + s.half_width)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - s.half_width)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + s.half_width)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (stroke_covers(s, x, y)) stroke[static_cast<size_t>(y) * w + x] = 1;
  }
  std::vector<int> last(static_cast<size_t>(w) * h, -1);
  for (size_t i = 0; i < scene.fruits.size(); ++i) {
    const Disk& d = scene.fruits[i];
    for (int y = std::max(0, static_cast<int>(d.cy - d.r) - 1); y <= std::min(h - 1, static_cast<int>(d.cy + d.r) + 1); ++y)
      for (int x = std::max(0, static_cast<int>(d.cx - d.r) - 1); x <= std::min(w - 1, static_cast<int>(d.cx + d.r) + 1); ++x)
        if (disk_covers(d, x, y)) last[static_cast<size_t>(y) * w + x] = static_cast<int>(i);
  }
  std::vector<OcclusionStats> stats(scene.fruits.size());
  for (size_t i = 0; i < scene.fruits.size(); ++i) {
    const Disk& d = scene.fruits[i];
    for (int y = std::max(0, static_cast<int>(d.cy - d.r) - 1); y <= std::min(h - 1, static_cast<int>(d.cy + d.r) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(d.cx - d.r) - 1); x <= std::min(w - 1, static_cast<int>(d.cx + d.r) + 1); ++x) {
        if (!disk_covers(d, x, y)) continue;
        const size_t k = static_cast<size_t>(y) * w + x;
        ++stats[i].area;
        if (last[k] > static_cast<int>(i)) ++stats[i].covered_by_fruit;
        if (stroke[k]) ++stats[i].covered_by_stroke;
      }
    }
  }
  return stats;
}

Occlusion classify(const OcclusionStats& s) {
  if (s.area == 0) return Occlusion::none;
  const double a = static_cast<double>(s.area);
  if (s.covered_by_fruit > kOcclusionThreshold * a) return Occlusion::by_fruit;
  if (s.covered_by_stroke > kOcclusionThreshold * a) return Occlusion::by_branch_leaf;
  return Occlusion::none;
}

std::vector<BoxAnnotation> scene_annotations(const Scene& scene) {
  const auto stats = occlusion_stats(scene);
  std::vector<BoxAnnotation> out;
  for (size_t i = 0; i < scene.fruits.size(); ++i) {
    const Disk& d = scene.fruits[i];
    const double x0 = std::max(0.0, d.cx - d.r), x1 = std::min<double>(scene.width, d.cx + d.r);
    const double y0 = std::max(0.0, d.cy - d.r), y1 = std::min<double>(scene.height, d.cy + d.r);
    if (x1 <= x0 || y1 <= y0) continue;
    BoxAnnotation a;
    a.class_id = static_cast<int>(classify(stats[i]));
    a.cx = (x0 + x1) / 2 / scene.width;
    a.cy = (y0 + y1) / 2 / scene.height;
    a.w = (x1 - x0) / scene.width;
    a.h = (y1 - y0) / scene.height;
    out.push_back(a);
  }
  return out;
}

Scene generate_scene(const SynthConfig& cfg, int index) {
  cfg.validate();
  auto rng = rng_for(cfg.rng_seed, index, 0);
  const double size = cfg.image_size;
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Scene scene;
  scene.width = scene.height = cfg.image_size;
  const double rmax = cfg.fruit_radius_px.max;
  std::vector<std::pair<double, double>> clusters(static_cast<size_t>(integer(cfg.cluster_count.min, cfg.cluster_count.max)));
  for (auto& c : clusters) c = {uniform(rmax, size - rmax), uniform(rmax, size - rmax)};
  const int fruits = integer(cfg.fruit_count.min, cfg.fruit_count.max);
  std::normal_distribution<double> spread(0.0, cfg.cluster_spread * rmax);
  for (int f = 0; f < fruits; ++f) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const auto& c = clusters[static_cast<size_t>(integer(0, static_cast<int>(clusters.size()) - 1))];
      Disk d{c.first + spread(rng), c.second + spread(rng), uniform(cfg.fruit_radius_px.min, cfg.fruit_radius_px.max)};
      if (d.cx < d.r || d.cy < d.r || d.cx > size - d.r || d.cy > size - d.r) continue;
      // Keep centres apart so every fruit stays at least partly visible.
      const bool crowded = std::any_of(scene.fruits.begin(), scene.fruits.end(), [&](const Disk& o) {
        return std::hypot(o.cx - d.cx, o.cy - d.cy) < 0.8 * std::max(o.r, d.r);
      });
      if (crowded) continue;
      scene.fruits.push_back(d);
      placed = true;
    }
    if (!placed) {
      throw DomainError("fruit_count_range", "infeasible packing: placed " + std::to_string(f) + " of " +
                                                 std::to_string(fruits) + " fruits after " +
                                                 std::to_string(kPlacementAttempts) + " attempts");
    }
  }
  const int strokes = static_cast<int>(std::lround(cfg.leaf_stroke_density * size * size / 1e4));
  for (int s = 0; s < strokes; ++s) {
    const double x0 = uniform(0, size), y0 = uniform(0, size);
    const double angle = uniform(0, 2 * std::numbers::pi);
    const double len = uniform(cfg.stroke_length_px.min, cfg.stroke_length_px.max);
    scene.strokes.push_back({x0, y0, x0 + len * std::cos(angle), y0 + len * std::sin(angle),
                             uniform(cfg.stroke_half_width_px.min, cfg.stroke_half_width_px.max)});
  }
  return scene;
}

Image render_scene(const Scene& scene, uint64_t texture_seed) {
  Image img(scene.width, scene.height);
  auto rng = rng_for(texture_seed, 0, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fx = 2 * std::numbers::pi * (1 + 2 * u(rng)) / scene.width;
  const double fy = 2 * std::numbers::pi * (1 + 2 * u(rng)) / scene.height;
  const double phase = 2 * std::numbers::pi * u(rng);
  // Foliage background: low-frequency shading plus per-pixel grain.
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double shade = 0.5 + 0.25 * std::sin(fx * x + phase) + 0.25 * std::cos(fy * y - phase);
      const double grain = u(rng) - 0.5;
      uint8_t* p = img.px(x, y);
      p[0] = static_cast<uint8_t>(std::clamp(40 + 30 * shade + 30 * grain, 0.0, 255.0));
      p[1] = static_cast<uint8_t>(std::clamp(90 + 60 * shade + 40 * grain, 0.0, 255.0));
      p[2] = static_cast<uint8_t>(std::clamp(35 + 20 * shade + 30 * grain, 0.0, 255.0));
    }
  }
  for (const Disk& d : scene.fruits) {
    const double tint = 0.85 + 0.3 * u(rng);
    for (int y = std::max(0, static_cast<int>(d.cy - d.r) - 1); y <= std::min(img.height - 1, static_cast<int>(d.cy + d.r) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(d.cx - d.r) - 1); x <= std::min(img.width - 1, static_cast<int>(d.cx + d.r) + 1); ++x) {
        if (!disk_covers(d, x, y)) continue;
        const double rr = std::hypot(x + 0.5 - d.cx, y + 0.5 - d.cy) / d.r;
        const double light = 1.0 - 0.45 * rr * rr;
        uint8_t* p = img.px(x, y);
        p[0] = static_cast<uint8_t>(std::clamp(215 * light * tint, 0.0, 255.0));
        p[1] = static_cast<uint8_t>(std::clamp(45 * light * tint + 10 * u(rng), 0.0, 255.0));
        p[2] = static_cast<uint8_t>(std::clamp(60 * light * tint, 0.0, 255.0));
      }
    }
  }
  for (const Stroke& s : scene.strokes) {
    const bool branch = u(rng) < 0.5;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - s.half_width)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + s.half_width)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - s.half_width)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + s.half_width)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!stroke_covers(s, x, y)) continue;
        uint8_t* p = img.px(x, y);
        if (branch) {
          p[0] = 95, p[1] = 65, p[2] = 35;
        } else {
          p[0] = 30, p[1] = 120, p[2] = 25;
        }
      }
    }
  }
  return img;
}

SynthSample generate_sample(const SynthConfig& cfg, int index) {
  SynthSample s;
  s.scene = generate_scene(cfg, index);
  s.image = render_scene(s.scene, cfg.rng_seed ^ (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(index + 1)));
  char name[32];
  std::snprintf(name, sizeof name, "synth_%04d", index);
  s.record.image_id = name;
  s.record.width = s.scene.width;
  s.record.height = s.scene.height;
  s.record.annotations = scene_annotations(s.scene);
  s.record.provenance = Provenance::synthetic;
  return s;
}

std::vector<SynthSample> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SynthSample> out;
  out.reserve(static_cast<size_t>(cfg.image_count));
  for (int i = 0; i < cfg.image_count; ++i) out.push_back(generate_sample(cfg, i));
  return out;
}

}  // namespace litchi::data
