// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "litchi/data/annotation.hpp"
#include "litchi/data/image.hpp"

namespace litchi::data {

struct TileOptions {
  int tile = 1024;
  int stride = 1024;
  /// Zero-pad the right and bottom remainder to a full tile.
  bool pad = true;
  /// A clipped box survives when it keeps at least this share of its area.
  double min_area_fraction = 0.3;
};

struct Tile {
  ImageRecord record;
  Image image;
  int offset_x = 0;
  int offset_y = 0;
  int row = 0;
  int col = 0;
};

/// Number of windows along an axis of `extent` pixels.
int tile_count(int extent, const TileOptions& options);

/// Sliding-window tiles covering the frame, row-major. Boxes are clipped to
/// each window and re-normalised to the tile size.
std::vector<Tile> tile_image(const ImageRecord& frame, const Image& image, const TileOptions& options = {});

/// Record-only variant (no pixels), used for planning and tests.
std::vector<Tile> tile_record(const ImageRecord& frame, const TileOptions& options = {});

}  // namespace litchi::data
