// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace litchi::data {

/// 8-bit RGB image, row-major interleaved (HWC).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  static constexpr int kChannels = 3;

  Image() = default;
  Image(int w, int h, uint8_t fill = 0);

  bool empty() const noexcept { return width == 0 || height == 0; }
  uint8_t* px(int x, int y) { return pixels.data() + (static_cast<size_t>(y) * width + x) * kChannels; }
  const uint8_t* px(int x, int y) const { return pixels.data() + (static_cast<size_t>(y) * width + x) * kChannels; }
  bool operator==(const Image&) const = default;
};

/// PNG via OpenCV; throws IoError naming the path.
Image read_image(const std::string& path);
void write_image(const Image& image, const std::string& path);

/// Bilinear resize, area averaging when shrinking.
Image resize(const Image& image, int width, int height);

}  // namespace litchi::data
