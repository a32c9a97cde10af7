// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/tiling.hpp"

#include <algorithm>
#include <cstring>

#include "litchi/error.hpp"

namespace litchi::data {

namespace {

void check(const ImageRecord& frame, const TileOptions& o) {
  if (frame.width <= 0 || frame.height <= 0) throw DomainError("frame", "empty frame '" + frame.image_id + "'");
  if (o.tile <= 0) throw DomainError("tile", "must be positive");
  if (o.stride <= 0) throw DomainError("stride", "must be positive");
  if (!(o.min_area_fraction >= 0 && o.min_area_fraction <= 1)) {
    throw DomainError("min_area_fraction", "must lie in [0, 1]");
  }
  if (!o.pad && (frame.width < o.tile || frame.height < o.tile)) {
    throw DomainError("tile", "tile " + std::to_string(o.tile) + " larger than unpadded frame " +
                                  std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
}

}  // namespace

int tile_count(int extent, const TileOptions& o) {
  if (extent <= o.tile) return 1;
  const int steps = o.pad ? (extent - o.tile + o.stride - 1) / o.stride : (extent - o.tile) / o.stride;
  return steps + 1;
}

std::vector<Tile> tile_record(const ImageRecord& frame, const TileOptions& o) {
  check(frame, o);
  const int rows = tile_count(frame.height, o), cols = tile_count(frame.width, o);
  std::vector<Tile> tiles;
  tiles.reserve(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Tile t;
      t.row = r;
      t.col = c;
      t.offset_x = c * o.stride;
      t.offset_y = r * o.stride;
      t.record.image_id = frame.image_id + "_r" + std::to_string(r) + "_c" + std::to_string(c);
      t.record.width = o.tile;
      t.record.height = o.tile;
      t.record.provenance = Provenance::tiled;
      const double wx0 = t.offset_x, wy0 = t.offset_y, wx1 = wx0 + o.tile, wy1 = wy0 + o.tile;
      for (const auto& a : frame.annotations) {
        const double x0 = (a.cx - a.w / 2) * frame.width, x1 = (a.cx + a.w / 2) * frame.width;
        const double y0 = (a.cy - a.h / 2) * frame.height, y1 = (a.cy + a.h / 2) * frame.height;
        const double cx0 = std::max(x0, wx0), cx1 = std::min(x1, wx1);
        const double cy0 = std::max(y0, wy0), cy1 = std::min(y1, wy1);
        if (cx1 <= cx0 || cy1 <= cy0) continue;
        const double kept = (cx1 - cx0) * (cy1 - cy0), full = (x1 - x0) * (y1 - y0);
        // Slack absorbs normalisation round-off for boxes exactly at the threshold.
        if (kept < o.min_area_fraction * full * (1 - 1e-9)) continue;
        BoxAnnotation b;
        b.class_id = a.class_id;
        b.cx = ((cx0 + cx1) / 2 - wx0) / o.tile;
        b.cy = ((cy0 + cy1) / 2 - wy0) / o.tile;
        b.w = (cx1 - cx0) / o.tile;
        b.h = (cy1 - cy0) / o.tile;
        t.record.annotations.push_back(b);
      }
      tiles.push_back(std::move(t));
    }
  }
  return tiles;
}

std::vector<Tile> tile_image(const ImageRecord& frame, const Image& image, const TileOptions& o) {
  if (image.width != frame.width || image.height != frame.height) {
    throw ShapeError("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                     " does not match record '" + frame.image_id + "'");
  }
  auto tiles = tile_record(frame, o);
  for (auto& t : tiles) {
    t.image = Image(o.tile, o.tile, 0);
    const int w = std::min(o.tile, image.width - t.offset_x);
    const int h = std::min(o.tile, image.height - t.offset_y);
    for (int y = 0; y < h; ++y) {
      std::memcpy(t.image.px(0, y), image.px(t.offset_x, t.offset_y + y), static_cast<size_t>(w) * Image::kChannels);
    }
  }
  return tiles;
}

}  // namespace litchi::data
